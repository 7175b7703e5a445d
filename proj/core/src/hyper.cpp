#include "ttrb/hyper.hpp"

#include <cmath>
#include <stdexcept>

namespace ttrb {

namespace {

std::size_t argmax_abs(const Vector& v) {
  std::size_t best = 0;
  double m = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > m) {
      m = std::abs(v[i]);
      best = static_cast<std::size_t>(i);
    }
  return best;
}

Matrix rows_of(const Matrix& m, std::span<const std::size_t> rows, Eigen::Index cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i])).head(cols);
  return out;
}

}  // namespace

std::vector<std::size_t> eim_loop(const Matrix& phi) {
  const Eigen::Index r = phi.cols();
  if (r == 0) return {};
  if (phi.rows() < r) throw ShapeError("eim_loop: more columns than rows");
  std::vector<std::size_t> idx{argmax_abs(phi.col(0))};
  if (phi.col(0).cwiseAbs().maxCoeff() == 0.0) throw std::runtime_error("eim_loop: zero basis vector");
  for (Eigen::Index l = 1; l < r; ++l) {
    const Matrix pp = rows_of(phi, idx, l);
    Vector rhs(l);
    for (Eigen::Index i = 0; i < l; ++i) rhs[i] = phi(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]), l);
    const Vector c = pp.partialPivLu().solve(rhs);
    const Vector res = phi.col(l) - phi.leftCols(l) * c;
    const std::size_t next = argmax_abs(res);
    if (std::abs(res[static_cast<Eigen::Index>(next)]) == 0.0) throw std::runtime_error("eim_loop: singular interpolation");
    idx.push_back(next);
  }
  return idx;
}

void AffineDecomposition::factorize() {
  if (interp.rows() != interp.cols()) throw ShapeError("interpolation matrix must be square");
  lu.compute(interp);
  const auto n = interp.rows();
  chi = lu.solve(Matrix::Identity(n, n)).norm();
}

Vector AffineDecomposition::coefficients(std::span<const double> samples) const {
  if (samples.size() != flat.size()) throw ShapeError("coefficients: sample count mismatch");
  return lu.solve(Eigen::Map<const Vector>(samples.data(), static_cast<Eigen::Index>(samples.size())));
}

Vector online_coefficients(const AffineDecomposition& a, std::span<const double> samples) {
  return a.coefficients(samples);
}

Matrix AffineDecomposition::basis_matrix() const { return kind == Kind::TT ? tt.merged() : st.merged(); }

Tensor AffineDecomposition::reconstruct(const Vector& coeffs) const {
  if (kind == Kind::TT) return tt_reconstruct(tt.cores, &coeffs).reshaped(quantity_dims);
  const Eigen::Index rs = st.spatial.cols(), rt = st.temporal.cols();
  const Matrix c = Eigen::Map<const RowMatrix>(coeffs.data(), rs, rt);
  const Matrix full = st.spatial * c * st.temporal.transpose();
  return fold(full, quantity_dims);
}

AffineDecomposition tt_mdeim(const Tensor& snapshots, double eps, bool split) {
  AffineDecomposition a;
  a.kind = AffineDecomposition::Kind::TT;
  a.quantity_dims.assign(snapshots.dims().begin(), snapshots.dims().end() - 1);
  a.tt = tt_svd(snapshots, eps, split);
  const auto& cores = a.tt.cores;
  const std::size_t k = cores.size();

  // Forward sweep: interpolate the partially sampled cores level by level.
  std::vector<std::vector<std::size_t>> local(k);
  Matrix sampled = Matrix::Ones(1, 1);
  for (std::size_t i = 0; i < k; ++i) {
    const Tensor partial = mode_contract(sampled, cores[i].tensor(), 0);
    const Matrix m = partial.unfold(2);
    local[i] = eim_loop(m);
    sampled = rows_of(m, local[i], m.cols());
  }
  a.interp = sampled;

  // Backward sweep: split composite indices into one index per axis.
  const std::size_t r = static_cast<std::size_t>(sampled.rows());
  a.axis_indices.assign(k, std::vector<std::size_t>(r));
  for (std::size_t j = 0; j < r; ++j) {
    std::size_t c = local[k - 1][j];
    for (std::size_t i = k; i-- > 0;) {
      const KronMap km{cores[i].left_rank(), cores[i].axis_len()};
      const auto [p, n] = km.inverse(c);
      a.axis_indices[i][j] = n;
      if (i > 0) c = local[i - 1][p];
    }
  }
  a.flat.resize(r);
  std::vector<std::size_t> idx(k);
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t i = 0; i < k; ++i) idx[i] = a.axis_indices[i][j];
    a.flat[j] = kron_index(a.quantity_dims, idx);
  }
  a.factorize();
  return a;
}

AffineDecomposition st_mdeim(const Tensor& snapshots, std::size_t spatial_axes, double eps) {
  AffineDecomposition a;
  a.kind = AffineDecomposition::Kind::ST;
  a.quantity_dims.assign(snapshots.dims().begin(), snapshots.dims().end() - 1);
  a.st = tpod(snapshots, spatial_axes, eps);
  const auto is = eim_loop(a.st.spatial);
  const auto it = eim_loop(a.st.temporal);
  a.axis_indices = {is, it};
  const std::size_t nt = static_cast<std::size_t>(a.st.temporal.rows());
  const Matrix ps = rows_of(a.st.spatial, is, a.st.spatial.cols());
  const Matrix pt = rows_of(a.st.temporal, it, a.st.temporal.cols());
  const Eigen::Index rs = ps.rows(), rt = pt.rows();
  a.interp.resize(rs * rt, rs * rt);
  for (Eigen::Index s = 0; s < rs; ++s)
    for (Eigen::Index q = 0; q < rs; ++q) a.interp.block(s * rt, q * rt, rt, rt) = ps(s, q) * pt;
  for (auto s : is)
    for (auto t : it) a.flat.push_back(s * nt + t);
  a.factorize();
  return a;
}

Tensor jacobian_snapshots_to_split_axes(const Tensor& nonzeros, const SparsityMap& map) {
  if (nonzeros.order() < 2 || nonzeros.dim(0) != map.global_nnz())
    throw ShapeError("jacobian snapshots do not match the sparsity pattern");
  const std::size_t rest = nonzeros.size() / nonzeros.dim(0);
  std::vector<std::size_t> dims = map.split_dims();
  dims.insert(dims.end(), nonzeros.dims().begin() + 1, nonzeros.dims().end());
  Tensor out(dims);
  for (std::size_t f = 0; f < map.size(); ++f) {
    const std::size_t g = map.global(f);
    if (g == SparsityMap::npos) continue;
    std::copy_n(nonzeros.data().begin() + static_cast<long>(g * rest), rest, out.data().begin() + static_cast<long>(f * rest));
  }
  return out;
}

}  // namespace ttrb
