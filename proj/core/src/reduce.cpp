#include "ttrb/reduce.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <optional>
#include <stdexcept>

namespace ttrb {

namespace {

struct Rescale {
  Matrix h;
  Matrix h_inv;
};

Rescale make_rescale(const SparseMatrix& norm) {
  const CholeskyFactor f = cholesky(norm);
  const auto n = static_cast<Eigen::Index>(f.size());
  return {f.dense(), tri_solve(f, Matrix::Identity(n, n), Transpose::No)};
}

/// Running state of a left-to-right TT sweep: `t` holds the unfolding of the
/// not yet compressed part, with rows (r_prev, N_i) once reshaped.
class Sweep {
 public:
  Sweep(const Tensor& snapshots, double eps, bool split) : dims_(snapshots.dims()) {
    if (snapshots.order() < 2) throw ShapeError("snapshot tensor needs a parameter axis");
    n_compressed_ = dims_.size() - 1;
    eps_i_ = split ? eps / std::sqrt(static_cast<double>(n_compressed_)) : eps;
    rest_ = snapshots.storage();
  }

  std::size_t n_compressed() const { return n_compressed_; }
  std::size_t axis() const { return axis_; }
  double eps_i() const { return eps_i_; }
  std::size_t rank() const { return rank_; }

  /// Current axis as a (r_prev, N_i, rest) tensor.
  Tensor current() const {
    const std::size_t n = dims_[axis_];
    const std::size_t cols = rest_.size() / (rank_ * n);
    return Tensor({rank_, n, cols}, rest_);
  }

  /// Compresses the current axis. When `rescale` is given the unfolding is
  /// rescaled along the axis before the SVD and the core is mapped back.
  TTCore step(const Rescale* rescale) {
    Tensor t = current();
    if (rescale) t = mode_contract(rescale->h, t, 1);
    const auto svd = truncated_svd(t.unfold(2), eps_i_);
    Tensor core = fold(svd.left, {rank_, dims_[axis_], svd.rank});
    if (rescale) core = mode_contract(rescale->h_inv, core, 1);
    set_remainder(svd.remainder);
    return TTCore(std::move(core));
  }

  /// Installs the remainder of the current axis and moves to the next one.
  void set_remainder(const Matrix& r, bool advance = true) {
    rank_ = static_cast<std::size_t>(r.rows());
    rest_.resize(static_cast<std::size_t>(r.size()));
    Eigen::Map<RowMatrix>(rest_.data(), r.rows(), r.cols()) = r;
    remainder_ = r;
    if (advance) ++axis_;
  }

  const Matrix& remainder() const { return remainder_; }

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> rest_;
  std::size_t n_compressed_ = 0;
  std::size_t axis_ = 0;
  std::size_t rank_ = 1;
  double eps_i_ = 0.0;
  Matrix remainder_;
};

TTBasis finish(Sweep& sw, std::vector<TTCore> cores, Orthogonality o, double eps, bool split) {
  while (sw.axis() < sw.n_compressed()) cores.push_back(sw.step(nullptr));
  TTBasis b;
  b.cores = std::move(cores);
  b.orthogonality = o;
  b.eps = eps;
  b.split = split;
  b.remainder = sw.remainder();
  return b;
}

/// Reorders rows (a, i) -> (i, a) of an (r * n) x c matrix.
Matrix swap_rows(const Matrix& m, std::size_t r, std::size_t n) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t i = 0; i < n; ++i) out.row(static_cast<Eigen::Index>(i * r + a)) = m.row(static_cast<Eigen::Index>(a * n + i));
  return out;
}

}  // namespace

const char* to_string(Orthogonality o) {
  switch (o) {
    case Orthogonality::Euclidean: return "euclidean";
    case Orthogonality::X1: return "x1";
    case Orthogonality::XK: return "xk";
  }
  return "unknown";
}

std::vector<std::size_t> TTBasis::ranks() const {
  std::vector<std::size_t> r;
  if (cores.empty()) return r;
  r.push_back(cores.front().left_rank());
  for (const auto& c : cores) r.push_back(c.right_rank());
  return r;
}

std::vector<std::size_t> TTBasis::axis_lengths() const {
  std::vector<std::size_t> n;
  for (const auto& c : cores) n.push_back(c.axis_len());
  return n;
}

Matrix STBasis::merged() const {
  const Eigen::Index ns = spatial.rows(), nt = temporal.rows();
  const Eigen::Index rs = spatial.cols(), rt = temporal.cols();
  Matrix m(ns * nt, rs * rt);
  for (Eigen::Index s = 0; s < ns; ++s)
    for (Eigen::Index a = 0; a < rs; ++a) m.block(s * nt, a * rt, nt, rt) = spatial(s, a) * temporal;
  return m;
}

TTBasis tt_svd(const Tensor& snapshots, double eps, bool split) {
  Sweep sw(snapshots, eps, split);
  return finish(sw, {}, Orthogonality::Euclidean, eps, split);
}

TTBasis x1_tt_svd(const Tensor& snapshots, const std::vector<SparseMatrix>& norms, double eps, bool split) {
  Sweep sw(snapshots, eps, split);
  if (norms.size() > sw.n_compressed()) throw ShapeError("x1_tt_svd: more norms than compressed axes");
  std::vector<TTCore> cores;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (norms[i].rows() != snapshots.dim(i)) throw ShapeError("x1_tt_svd: norm size mismatch on axis " + std::to_string(i));
    const Rescale r = make_rescale(norms[i]);
    cores.push_back(sw.step(&r));
  }
  return finish(sw, std::move(cores), Orthogonality::X1, eps, split);
}

Matrix weight_update(const Matrix& w, const TTCore& core, const Matrix& y) {
  const auto rp = static_cast<Eigen::Index>(core.left_rank());
  const auto n = static_cast<Eigen::Index>(core.axis_len());
  if (w.rows() != rp || w.cols() != rp || y.rows() != n || y.cols() != n) throw ShapeError("weight_update: size mismatch");
  const Matrix c = core.tensor().unfold(2);
  // Z = (W kron Y) C, formed block by block.
  Matrix yc(rp * n, c.cols());
  Matrix z = Matrix::Zero(rp * n, c.cols());
  for (Eigen::Index b = 0; b < rp; ++b) yc.middleRows(b * n, n) = y * c.middleRows(b * n, n);
  for (Eigen::Index a = 0; a < rp; ++a)
    for (Eigen::Index b = 0; b < rp; ++b)
      if (w(a, b) != 0.0) z.middleRows(a * n, n) += w(a, b) * yc.middleRows(b * n, n);
  return c.transpose() * z;
}

std::size_t surrogate_term(const KroneckerSum& x) {
  std::size_t best_k = 0;
  double best = -1.0;
  for (std::size_t k = 0; k < x.n_terms(); ++k) {
    double p = 1.0;
    for (std::size_t i = 0; i < x.order(); ++i) p *= spectral_radius(x.factor(k, i));
    if (p > best * (1.0 + 1e-12)) {
      best = p;
      best_k = k;
    }
  }
  return best_k;
}

std::vector<SparseMatrix> surrogate_norm(const KroneckerSum& x, std::size_t q) {
  std::vector<SparseMatrix> y;
  for (std::size_t i = 0; i < x.order(); ++i) {
    if (i != q || x.n_terms() == 1) {
      y.push_back(x.factor(q, i));
      continue;
    }
    const std::size_t other = q == 0 ? 1 : 0;
    y.push_back(add(x.factor(q, i), x.factor(other, i)));
  }
  return y;
}

TTBasis xk_tt_svd(const Tensor& snapshots, const KroneckerSum& x, double eps, bool split) {
  const std::size_t d = x.order();
  Sweep sw(snapshots, eps, split);
  if (d == 0 || d > sw.n_compressed()) throw ShapeError("xk_tt_svd: norm order does not fit the snapshots");
  for (std::size_t i = 0; i < d; ++i)
    if (x.factor(0, i).rows() != snapshots.dim(i)) throw ShapeError("xk_tt_svd: norm size mismatch on axis " + std::to_string(i));

  const std::size_t q = surrogate_term(x);
  const auto surrogate = surrogate_norm(x, q);
  std::vector<Matrix> weights(x.n_terms(), Matrix::Ones(1, 1));
  std::vector<TTCore> cores;
  for (std::size_t i = 0; i + 1 < d; ++i) {
    const Rescale r = make_rescale(surrogate[i]);
    cores.push_back(sw.step(&r));
    for (std::size_t k = 0; k < x.n_terms(); ++k)
      weights[k] = weight_update(weights[k], cores.back(), x.factor(k, i).to_dense());
  }

  // Last spatial axis: surrogate step, then re-orthonormalize in the exact norm.
  const Rescale r = make_rescale(surrogate[d - 1]);
  const TTCore draft = sw.step(&r);
  const Matrix rem = sw.remainder();
  const std::size_t rp = draft.left_rank();
  const std::size_t n = draft.axis_len();

  SparseMatrix xhat;
  for (std::size_t k = 0; k < x.n_terms(); ++k) {
    const SparseMatrix term = kron_sparse(x.factor(k, d - 1), SparseMatrix::from_dense(weights[k]));
    xhat = k == 0 ? term : add(xhat, term);
  }
  const CholeskyFactor hhat = cholesky(xhat);
  const Matrix b = hhat.apply(swap_rows(draft.tensor().unfold(2), rp, n));
  Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Matrix w = svd.singularValues().asDiagonal() * svd.matrixV().transpose() * rem;
  const auto inner = truncated_svd(w, sw.eps_i());
  const Matrix phi_tilde = svd.matrixU() * inner.left;
  const Matrix phi = swap_rows(tri_solve(hhat, phi_tilde, Transpose::No), n, rp);
  cores.emplace_back(fold(phi, {rp, n, inner.rank}));
  sw.set_remainder(inner.remainder, false);
  return finish(sw, std::move(cores), Orthogonality::XK, eps, split);
}

STBasis tpod(const Tensor& snapshots, std::size_t spatial_axes, const SparseMatrix& x, double eps) {
  const std::size_t order = snapshots.order();
  if (spatial_axes == 0 || spatial_axes + 1 > order || order > spatial_axes + 2)
    throw ShapeError("tpod: expected (space..., [time,] parameter) axes");
  const std::size_t ns = product(std::span(snapshots.dims()).first(spatial_axes));
  const std::size_t nt = order == spatial_axes + 2 ? snapshots.dim(spatial_axes) : 1;
  const std::size_t nmu = snapshots.dims().back();

  Matrix u = snapshots.unfold(spatial_axes);
  std::optional<CholeskyFactor> h;
  if (x.rows() > 0) {
    if (x.rows() != ns) throw ShapeError("tpod: norm size mismatch");
    h = cholesky(x);
    u = h->apply(u);
  }
  STBasis b;
  b.eps = eps;
  b.spatial_norm = u.norm();
  const auto s = truncated_svd(u, eps);
  b.spatial = h ? tri_solve(*h, s.left, Transpose::No) : s.left;
  b.temporal_norm = s.remainder.norm();

  const std::size_t rs = s.rank;
  if (nt == 1) {
    b.temporal = Matrix::Ones(1, 1);
    return b;
  }
  const Tensor rem = fold(s.remainder, {rs, nt, nmu});
  const std::size_t perm[] = {1, 0, 2};
  const auto st = truncated_svd(permute_axes(rem, perm).unfold(1), eps);
  b.temporal = st.left;
  return b;
}

STBasis tpod(const Tensor& snapshots, std::size_t spatial_axes, double eps) {
  return tpod(snapshots, spatial_axes, SparseMatrix{}, eps);
}

std::size_t subspace_dimension(const TTBasis& b) { return b.dimension(); }
std::size_t subspace_dimension(const STBasis& b) { return b.dimension(); }

double reduction_factor(std::size_t full_dimension, std::size_t reduced_dimension) {
  if (reduced_dimension == 0) throw std::invalid_argument("reduction_factor: empty subspace");
  return static_cast<double>(full_dimension) / static_cast<double>(reduced_dimension);
}

}  // namespace ttrb
