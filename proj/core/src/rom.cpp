#include "ttrb/rom.hpp"

#include "ttrb/io.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

namespace ttrb {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Coupling {
  std::size_t row;
  std::size_t col;
  std::size_t z;
};

/// G(a', b', d') -> G(a, b, d) = sum G(a', b', d') phi(a', row, a) op(b', z, b) phi(d', col, d)
/// over the couplings (row, col, z).
Tensor operator_step(const Tensor& g, const TTCore& phi, const TTCore& op, std::span<const Coupling> cpl) {
  const auto A0 = static_cast<Eigen::Index>(phi.left_rank());
  const auto A = static_cast<Eigen::Index>(phi.right_rank());
  const auto N = static_cast<Eigen::Index>(phi.axis_len());
  const auto B0 = static_cast<Eigen::Index>(op.left_rank());
  const auto B = static_cast<Eigen::Index>(op.right_rank());
  const auto Nz = static_cast<Eigen::Index>(op.axis_len());
  if (g.dim(0) != phi.left_rank() || g.dim(1) != op.left_rank() || g.dim(2) != phi.left_rank())
    throw ShapeError("operator_step: rank mismatch");

  const RowMatrix a1 = g.unfold(1).transpose() * phi.tensor().unfold(1);  // (b' d') x (row a)
  RowMatrix a2 = RowMatrix::Zero(A0 * N, A * B);                          // (d' col) x (a b)
  const auto& od = op.tensor().data();
  for (const auto& c : cpl) {
    const auto row = static_cast<Eigen::Index>(c.row), col = static_cast<Eigen::Index>(c.col);
    const auto z = static_cast<Eigen::Index>(c.z);
    for (Eigen::Index b0 = 0; b0 < B0; ++b0) {
      Eigen::Map<const Eigen::RowVectorXd> ov(od.data() + (b0 * Nz + z) * B, B);
      if (ov.isZero(0.0)) continue;
      for (Eigen::Index d0 = 0; d0 < A0; ++d0) {
        Eigen::Map<const Vector> av(a1.data() + (b0 * A0 + d0) * N * A + row * A, A);
        Eigen::Map<RowMatrix> dst(a2.data() + (d0 * N + col) * A * B, A, B);
        dst.noalias() += av * ov;
      }
    }
  }
  const Matrix out = a2.transpose() * phi.tensor().unfold(2);  // (a b) x d
  return fold(out, {phi.right_rank(), op.right_rank(), phi.right_rank()});
}

/// G(a', b') -> sum G(a', b') phi(a', n, a) rhs(b', n, b).
Matrix rhs_step(const Matrix& g, const TTCore& phi, const TTCore& rhs) {
  if (static_cast<std::size_t>(g.rows()) != phi.left_rank() || static_cast<std::size_t>(g.cols()) != rhs.left_rank())
    throw ShapeError("rhs_step: rank mismatch");
  if (phi.axis_len() != rhs.axis_len()) throw ShapeError("rhs_step: axis mismatch");
  const RowMatrix a1 = g.transpose() * phi.tensor().unfold(1);  // b' x (n a)
  const Eigen::Map<const RowMatrix> view(a1.data(), a1.rows() * static_cast<Eigen::Index>(phi.axis_len()),
                                         static_cast<Eigen::Index>(phi.right_rank()));
  return view.transpose() * rhs.tensor().unfold(2);
}

std::vector<Coupling> spatial_couplings(const SparsityMap& map, std::size_t axis) {
  std::vector<Coupling> c;
  for (std::size_t z = 0; z < map.split_dims()[axis]; ++z) {
    const auto [r, k] = map.entry_1d(axis, z);
    c.push_back({r, k, z});
  }
  return c;
}

std::vector<Coupling> temporal_couplings(std::size_t nt, bool shifted) {
  std::vector<Coupling> c;
  for (std::size_t n = shifted ? 1 : 0; n < nt; ++n) c.push_back({n, shifted ? n - 1 : n, shifted ? n - 1 : n});
  return c;
}

Tensor spatial_projection(const TTBasis& basis, const std::vector<TTCore>& op, const SparsityMap& map, std::size_t d) {
  Tensor g({1, 1, 1}, {1.0});
  for (std::size_t i = 0; i < d; ++i) {
    const auto c = spatial_couplings(map, i);
    g = operator_step(g, basis.cores[i], op[i], c);
  }
  return g;
}

Matrix temporal_product(const Matrix& phi, const Vector& w, bool shifted) {
  const Eigen::Index nt = phi.rows();
  Matrix t = Matrix::Zero(phi.cols(), phi.cols());
  for (Eigen::Index n = shifted ? 1 : 0; n < nt; ++n) {
    const Eigen::Index m = shifted ? n - 1 : n;
    t += w[m] * phi.row(n).transpose() * phi.row(m);
  }
  return t;
}

}  // namespace

const char* to_string(Method m) { return m == Method::TT ? "TT-RB" : "ST-RB"; }

Method parse_method(const std::string& s) {
  if (s == "TT-RB" || s == "ttrb" || s == "tt" || s == "TT") return Method::TT;
  if (s == "ST-RB" || s == "strb" || s == "st" || s == "ST") return Method::ST;
  throw std::invalid_argument("unknown method '" + s + "'");
}

std::size_t ReducedModel::dimension() const { return method == Method::TT ? tt.dimension() : st.dimension(); }

Tensor ReducedModel::reconstruct(const Vector& coeffs) const {
  if (method == Method::TT) return tt_reconstruct(tt.cores, &coeffs).reshaped(state_dims);
  const Matrix c = Eigen::Map<const RowMatrix>(coeffs.data(), st.spatial.cols(), st.temporal.cols());
  return fold(st.spatial * c * st.temporal.transpose(), state_dims);
}

Matrix ReducedModel::basis_matrix() const { return method == Method::TT ? tt.merged() : st.merged(); }

Tensor project_jacobian_tt(const TTBasis& basis, const TTBasis& op, const SparsityMap& map, std::size_t d,
                           bool shifted) {
  if (basis.cores.size() != op.cores.size()) throw ShapeError("project_jacobian_tt: core count mismatch");
  Tensor g = spatial_projection(basis, op.cores, map, d);
  if (basis.cores.size() == d) {
    if (shifted) throw std::invalid_argument("steady problems have no time coupling");
    return g;
  }
  const auto c = temporal_couplings(basis.cores[d].axis_len(), shifted);
  return operator_step(g, basis.cores[d], op.cores[d], c);
}

Matrix project_residual_tt(const TTBasis& basis, const TTBasis& rhs) {
  if (basis.cores.size() != rhs.cores.size()) throw ShapeError("project_residual_tt: core count mismatch");
  Matrix g = Matrix::Ones(1, 1);
  for (std::size_t i = 0; i < basis.cores.size(); ++i) g = rhs_step(g, basis.cores[i], rhs.cores[i]);
  return g;
}

Matrix project_mass_shift_tt(const TTBasis& basis, const std::vector<SparseMatrix>& mass, const SparsityMap& map) {
  const std::size_t d = mass.size();
  if (basis.cores.size() != d + 1) throw std::invalid_argument("project_mass_shift_tt needs a temporal core");
  std::vector<TTCore> op;
  for (std::size_t i = 0; i < d; ++i) {
    Tensor t({1, map.split_dims()[i], 1});
    for (std::size_t z = 0; z < map.split_dims()[i]; ++z) {
      const auto [r, c] = map.entry_1d(i, z);
      t[z] = mass[i].coeff(r, c);
    }
    op.emplace_back(std::move(t));
  }
  const std::size_t nt = basis.cores[d].axis_len();
  op.emplace_back(Tensor({1, nt, 1}, std::vector<double>(nt, 1.0)));
  Tensor g = spatial_projection(basis, op, map, d);
  g = operator_step(g, basis.cores[d], op[d], temporal_couplings(nt, true));
  return g.reshaped({g.dim(0), g.dim(2)}).unfold(1);
}

Tensor project_jacobian_st(const STBasis& basis, const STBasis& op, const SparseMatrix& pattern, bool shifted) {
  const Eigen::Index rs = basis.spatial.cols(), rt = basis.temporal.cols();
  const Eigen::Index ks = op.spatial.cols(), kt = op.temporal.cols();
  if (op.spatial.rows() != static_cast<Eigen::Index>(pattern.nnz())) throw ShapeError("project_jacobian_st: pattern mismatch");
  std::vector<Matrix> s(static_cast<std::size_t>(ks)), t(static_cast<std::size_t>(kt));
  for (Eigen::Index q = 0; q < ks; ++q) {
    const Vector col = op.spatial.col(q);
    const SparseMatrix k = pattern.with_values(std::vector<double>(col.data(), col.data() + col.size()));
    s[static_cast<std::size_t>(q)] = basis.spatial.transpose() * (k * basis.spatial);
  }
  for (Eigen::Index q = 0; q < kt; ++q) t[static_cast<std::size_t>(q)] = temporal_product(basis.temporal, op.temporal.col(q), shifted);

  const auto n = static_cast<std::size_t>(rs * rt);
  const auto nk = static_cast<std::size_t>(ks * kt);
  Tensor out({n, nk, n});
  for (Eigen::Index as = 0; as < rs; ++as)
    for (Eigen::Index at = 0; at < rt; ++at)
      for (Eigen::Index qs = 0; qs < ks; ++qs)
        for (Eigen::Index qt = 0; qt < kt; ++qt)
          for (Eigen::Index bs = 0; bs < rs; ++bs)
            for (Eigen::Index bt = 0; bt < rt; ++bt)
              out[((static_cast<std::size_t>(as * rt + at) * nk) + static_cast<std::size_t>(qs * kt + qt)) * n +
                  static_cast<std::size_t>(bs * rt + bt)] =
                  s[static_cast<std::size_t>(qs)](as, bs) * t[static_cast<std::size_t>(qt)](at, bt);
  return out;
}

Matrix project_residual_st(const STBasis& basis, const STBasis& rhs) {
  const Matrix rs = basis.spatial.transpose() * rhs.spatial;
  const Matrix rt = basis.temporal.transpose() * rhs.temporal;
  Matrix out(rs.rows() * rt.rows(), rs.cols() * rt.cols());
  for (Eigen::Index a = 0; a < rs.rows(); ++a)
    for (Eigen::Index q = 0; q < rs.cols(); ++q) out.block(a * rt.rows(), q * rt.cols(), rt.rows(), rt.cols()) = rs(a, q) * rt;
  return out;
}

Matrix project_mass_shift_st(const STBasis& basis, const SparseMatrix& mass) {
  const Matrix ms = basis.spatial.transpose() * (mass * basis.spatial);
  const Matrix mt = temporal_product(basis.temporal, Vector::Ones(basis.temporal.rows()), true);
  Matrix out(ms.rows() * mt.rows(), ms.cols() * mt.cols());
  for (Eigen::Index a = 0; a < ms.rows(); ++a)
    for (Eigen::Index b = 0; b < ms.cols(); ++b) out.block(a * mt.rows(), b * mt.cols(), mt.rows(), mt.cols()) = ms(a, b) * mt;
  return out;
}

std::vector<JacobianEntry> jacobian_sample_entries(const AffineDecomposition& a, const FullOrderModel& fom) {
  const bool tr = fom.spec().transient();
  const std::size_t nt = fom.n_time();
  std::vector<JacobianEntry> e;
  for (auto f : a.flat) {
    const std::size_t z = tr ? f / nt : f;
    const std::size_t s = tr ? f % nt : 0;
    const auto [r, c] = a.kind == AffineDecomposition::Kind::TT ? fom.sparsity().entry_of_split(z)
                                                                : fom.sparsity().entry_of_global(z);
    e.push_back({r, c, s});
  }
  return e;
}

std::vector<ResidualEntry> residual_sample_entries(const AffineDecomposition& a, const FullOrderModel& fom) {
  const bool tr = fom.spec().transient();
  const std::size_t nt = fom.n_time();
  std::vector<ResidualEntry> e;
  for (auto f : a.flat) e.push_back({tr ? f / nt : f, tr ? f % nt : 0});
  return e;
}

namespace {

void fill_common(ReducedModel& rom, const FullOrderModel& fom, const SnapshotSet& snaps, const RomOptions& opt) {
  if (snaps.n_hyper == 0) throw std::invalid_argument("hyper-reduction needs at least one snapshot");
  rom.state_dims = fom.state_dims();
  rom.transient = fom.spec().transient();
  rom.theta = fom.spec().theta;
  rom.dt = fom.spec().dt();
  rom.eps = opt.eps;
  rom.res_snapshot_norm = snaps.residuals.norm();
  rom.jac_snapshot_norm = snaps.jacobians.norm();
}

}  // namespace

ReducedModel build_tt_rom(const FullOrderModel& fom, const SnapshotSet& snaps, const RomOptions& opt) {
  ReducedModel rom;
  rom.method = Method::TT;
  fill_common(rom, fom, snaps, opt);
  const std::size_t d = fom.spec().space.dim();

  auto t0 = Clock::now();
  rom.tt = xk_tt_svd(snaps.solutions, fom.norm(), opt.eps, opt.split);
  rom.basis_seconds = seconds_since(t0);

  t0 = Clock::now();
  rom.jac = tt_mdeim(jacobian_snapshots_to_split_axes(snaps.jacobians, fom.sparsity()), opt.eps, opt.split);
  rom.res = tt_mdeim(snaps.residuals, opt.eps, opt.split);
  rom.jac_entries = jacobian_sample_entries(rom.jac, fom);
  rom.res_entries = residual_sample_entries(rom.res, fom);
  rom.hyper_seconds = seconds_since(t0);

  t0 = Clock::now();
  rom.jac_diag = project_jacobian_tt(rom.tt, rom.jac.tt, fom.sparsity(), d, false);
  if (rom.transient) {
    rom.jac_sub = project_jacobian_tt(rom.tt, rom.jac.tt, fom.sparsity(), d, true);
    std::vector<SparseMatrix> mass;
    for (const auto& g : fom.spec().space.grids()) mass.push_back(mass_1d(g));
    rom.mass_sub = project_mass_shift_tt(rom.tt, mass, fom.sparsity());
  }
  rom.res_proj = project_residual_tt(rom.tt, rom.res.tt);
  rom.projection_seconds = seconds_since(t0);
  return rom;
}

ReducedModel build_st_rom(const FullOrderModel& fom, const SnapshotSet& snaps, const RomOptions& opt) {
  ReducedModel rom;
  rom.method = Method::ST;
  fill_common(rom, fom, snaps, opt);
  const std::size_t d = fom.spec().space.dim();

  auto t0 = Clock::now();
  rom.st = tpod(snaps.solutions, d, fom.norm().expand(), opt.eps);
  rom.basis_seconds = seconds_since(t0);

  t0 = Clock::now();
  rom.jac = st_mdeim(snaps.jacobians, 1, opt.eps);
  rom.res = st_mdeim(snaps.residuals, d, opt.eps);
  rom.jac_entries = jacobian_sample_entries(rom.jac, fom);
  rom.res_entries = residual_sample_entries(rom.res, fom);
  rom.hyper_seconds = seconds_since(t0);

  t0 = Clock::now();
  const SparseMatrix& pattern = fom.assembler().pattern();
  rom.jac_diag = project_jacobian_st(rom.st, rom.jac.st, pattern, false);
  if (rom.transient) {
    rom.jac_sub = project_jacobian_st(rom.st, rom.jac.st, pattern, true);
    rom.mass_sub = project_mass_shift_st(rom.st, fom.assembler().mass());
  }
  rom.res_proj = project_residual_st(rom.st, rom.res.st);
  rom.projection_seconds = seconds_since(t0);
  return rom;
}

ReducedModel build_rom(Method m, const FullOrderModel& fom, const SnapshotSet& snaps, const RomOptions& opt) {
  return m == Method::TT ? build_tt_rom(fom, snaps, opt) : build_st_rom(fom, snaps, opt);
}

Matrix reduced_operator(const ReducedModel& rom, const Vector& cj) {
  const auto n = static_cast<Eigen::Index>(rom.jac_diag.dim(0));
  const auto nk = static_cast<Eigen::Index>(rom.jac_diag.dim(1));
  if (cj.size() != nk) throw ShapeError("reduced_operator: coefficient length mismatch");
  Vector w = cj;
  Matrix k = Matrix::Zero(n, n);
  auto accumulate = [&](const Tensor& t, double scale) {
    const RowMatrix m = t.reshaped({t.dim(0), t.dim(1) * t.dim(2)}).unfold(1);
    for (Eigen::Index a = 0; a < n; ++a)
      k.row(a) += scale * (w.transpose() * Eigen::Map<const RowMatrix>(m.row(a).data(), nk, n));
  };
  accumulate(rom.jac_diag, 1.0);
  if (rom.transient) {
    if (rom.theta < 1.0) accumulate(rom.jac_sub, (1.0 - rom.theta) / rom.theta);
    k -= rom.mass_sub / (rom.theta * rom.dt);
  }
  return k;
}

Vector reduced_rhs(const ReducedModel& rom, const Vector& cr) { return rom.res_proj * cr; }

OnlineResult online_solve(const ReducedModel& rom, const FullOrderModel& fom, std::span<const double> mu) {
  OnlineResult out;
  const auto js = fom.jacobian_entries(mu, rom.jac_entries);
  const auto rs = fom.residual_entries(mu, rom.res_entries);
  out.jac_coeffs = rom.jac.coefficients(js);
  out.res_coeffs = rom.res.coefficients(rs);
  const Matrix k = reduced_operator(rom, out.jac_coeffs);
  const Vector l = reduced_rhs(rom, out.res_coeffs);
  out.coeffs = k.partialPivLu().solve(l);
  out.state = rom.reconstruct(out.coeffs);
  return out;
}

double relative_error(const Tensor& fom, const Tensor& rom, const KroneckerSum& x) {
  if (fom.dims() != rom.dims()) throw ShapeError("relative_error: shape mismatch");
  Tensor diff = fom;
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= rom[i];
  double num = 0.0, den = 0.0;
  for (double v : x.column_norms_sq(diff)) num += v;
  for (double v : x.column_norms_sq(fom)) den += v;
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

double error_metric(const std::vector<Tensor>& fom, const std::vector<Tensor>& rom, const KroneckerSum& x) {
  if (fom.size() != rom.size() || fom.empty()) throw std::invalid_argument("error_metric: mismatched solution sets");
  double s = 0.0;
  for (std::size_t j = 0; j < fom.size(); ++j) s += relative_error(fom[j], rom[j], x);
  return s / static_cast<double>(fom.size());
}

StabilityConstants stability_constants(const Matrix& k, const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(x);
  if (es.eigenvalues().minCoeff() <= 0.0) throw NotSpdError(0);
  const Matrix xm = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  const Matrix b = xm * k * xm;
  Eigen::JacobiSVD<Matrix> svd(b);
  const auto& s = svd.singularValues();
  return {s[s.size() - 1], s[0]};
}

AposterioriEstimate aposteriori_estimate(const ReducedModel& rom, const FullOrderModel& fom,
                                         std::span<const double> mu, const Tensor& fom_state) {
  const std::size_t ns = fom.spec().space.n_free();
  const std::size_t nt = fom.n_time();
  const auto n = static_cast<Eigen::Index>(ns * nt);
  if (n > 4000) throw std::invalid_argument("aposteriori_estimate is meant for small problems");

  const OnlineResult on = online_solve(rom, fom, mu);
  const Matrix xs = fom.norm().expand().to_dense();
  // State ordering is (space, time) with time fastest.
  auto state_index = [nt](std::size_t i, std::size_t s) { return static_cast<Eigen::Index>(i * nt + s); };
  Matrix x = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < ns; ++j)
      for (std::size_t s = 0; s < nt; ++s) x(state_index(i, s), state_index(j, s)) = rom.dt * xs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

  const SparseMatrix kst = fom.space_time_operator(mu);
  Matrix k = Matrix::Zero(n, n);
  {
    const auto cols = kst.col_indices();
    for (std::size_t p = 0; p < kst.nnz(); ++p) {
      const std::size_t r = kst.row_indices()[p], c = cols[p];
      k(state_index(r % ns, r / ns), state_index(c % ns, c / ns)) += kst.values()[p];
    }
  }

  // Hyper-reduced operator and right-hand side in full dimension.
  const Tensor jq = rom.jac.reconstruct(on.jac_coeffs);
  const auto& map = fom.sparsity();
  const SparseMatrix& pattern = fom.assembler().pattern();
  const auto pcols = pattern.col_indices();
  const SparseMatrix mass = fom.assembler().mass();
  auto jhat = [&](std::size_t p, std::size_t s) {
    const std::size_t z = rom.jac.kind == AffineDecomposition::Kind::TT ? map.split(p) : p;
    return jq[z * nt + s];
  };
  Matrix khat = Matrix::Zero(n, n);
  for (std::size_t s = 0; s < nt; ++s)
    for (std::size_t p = 0; p < pattern.nnz(); ++p) {
      const std::size_t i = pattern.row_indices()[p], j = pcols[p];
      khat(state_index(i, s), state_index(j, s)) += jhat(p, s);
      if (s == 0 || !rom.transient) continue;
      khat(state_index(i, s), state_index(j, s - 1)) +=
          (1.0 - rom.theta) / rom.theta * jhat(p, s - 1) - mass.values()[p] / (rom.theta * rom.dt);
    }
  const Tensor lq = rom.res.reconstruct(on.res_coeffs);
  const Vector lhat = Eigen::Map<const Vector>(lq.data().data(), n);
  const Vector uhat = Eigen::Map<const Vector>(on.state.data().data(), n);
  const Vector u = Eigen::Map<const Vector>(fom_state.data().data(), n);

  AposterioriEstimate est;
  est.stability = stability_constants(k, x);
  const Eigen::LLT<Matrix> xl(x);
  const Vector r = lhat - khat * uhat;
  est.residual_term = std::sqrt(r.dot(xl.solve(r)));
  const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(x, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  const double xinv_half = 1.0 / std::sqrt(lmin);
  const double uhat_x = std::sqrt(uhat.dot(x * uhat));
  const double kl = rom.res.kind == AffineDecomposition::Kind::TT ? static_cast<double>(rom.res.tt.cores.size()) : 2.0;
  const double kk = rom.jac.kind == AffineDecomposition::Kind::TT ? static_cast<double>(rom.jac.tt.cores.size()) : 2.0;
  est.rhs_term = std::sqrt(kl) * rom.eps * rom.res.chi * rom.res_snapshot_norm * xinv_half;
  est.jacobian_term = std::sqrt(kk) * rom.eps * rom.jac.chi * rom.jac_snapshot_norm * xinv_half * xinv_half * uhat_x;
  est.bound = (est.rhs_term + est.jacobian_term + est.residual_term) / est.stability.sigma_min;
  const Vector e = u - uhat;
  est.error = std::sqrt(e.dot(x * e));
  return est;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

namespace fs = std::filesystem;

Tensor index_tensor(const std::vector<std::size_t>& v) {
  std::vector<double> d(v.begin(), v.end());
  return Tensor({v.size()}, std::move(d));
}

std::vector<std::size_t> tensor_indices(const Tensor& t) {
  std::vector<std::size_t> v;
  for (double x : t.data()) v.push_back(static_cast<std::size_t>(x));
  return v;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<std::size_t> split_list(const std::string& s) {
  std::vector<std::size_t> v;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) v.push_back(std::stoul(item));
  return v;
}

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void save_tt(const fs::path& dir, const std::string& prefix, const TTBasis& b, Manifest& m) {
  m[prefix + ".cores"] = std::to_string(b.cores.size());
  m[prefix + ".orthogonality"] = to_string(b.orthogonality);
  for (std::size_t i = 0; i < b.cores.size(); ++i)
    write_tensor(dir / (prefix + "_core" + std::to_string(i) + ".ttrb"), b.cores[i].tensor());
}

TTBasis load_tt(const fs::path& dir, const std::string& prefix, const Manifest& m) {
  TTBasis b;
  const std::size_t k = std::stoul(m.at(prefix + ".cores"));
  for (std::size_t i = 0; i < k; ++i) b.cores.emplace_back(read_tensor(dir / (prefix + "_core" + std::to_string(i) + ".ttrb")));
  const auto& o = m.at(prefix + ".orthogonality");
  b.orthogonality = o == "x1" ? Orthogonality::X1 : o == "xk" ? Orthogonality::XK : Orthogonality::Euclidean;
  return b;
}

void save_st(const fs::path& dir, const std::string& prefix, const STBasis& b) {
  write_tensor(dir / (prefix + "_spatial.ttrb"), Tensor::from_matrix(b.spatial));
  write_tensor(dir / (prefix + "_temporal.ttrb"), Tensor::from_matrix(b.temporal));
}

STBasis load_st(const fs::path& dir, const std::string& prefix) {
  STBasis b;
  b.spatial = read_tensor(dir / (prefix + "_spatial.ttrb")).unfold(1);
  b.temporal = read_tensor(dir / (prefix + "_temporal.ttrb")).unfold(1);
  return b;
}

void save_affine(const fs::path& dir, const std::string& prefix, const AffineDecomposition& a, Manifest& m) {
  m[prefix + ".kind"] = a.kind == AffineDecomposition::Kind::TT ? "tt" : "st";
  m[prefix + ".dims"] = join(a.quantity_dims);
  m[prefix + ".axes"] = std::to_string(a.axis_indices.size());
  if (a.kind == AffineDecomposition::Kind::TT)
    save_tt(dir, prefix, a.tt, m);
  else
    save_st(dir, prefix, a.st);
  for (std::size_t i = 0; i < a.axis_indices.size(); ++i)
    write_tensor(dir / (prefix + "_axis" + std::to_string(i) + ".ttrb"), index_tensor(a.axis_indices[i]));
  write_tensor(dir / (prefix + "_flat.ttrb"), index_tensor(a.flat));
  write_tensor(dir / (prefix + "_interp.ttrb"), Tensor::from_matrix(a.interp));
}

AffineDecomposition load_affine(const fs::path& dir, const std::string& prefix, const Manifest& m) {
  AffineDecomposition a;
  a.kind = m.at(prefix + ".kind") == "tt" ? AffineDecomposition::Kind::TT : AffineDecomposition::Kind::ST;
  a.quantity_dims = split_list(m.at(prefix + ".dims"));
  if (a.kind == AffineDecomposition::Kind::TT)
    a.tt = load_tt(dir, prefix, m);
  else
    a.st = load_st(dir, prefix);
  const std::size_t axes = std::stoul(m.at(prefix + ".axes"));
  for (std::size_t i = 0; i < axes; ++i)
    a.axis_indices.push_back(tensor_indices(read_tensor(dir / (prefix + "_axis" + std::to_string(i) + ".ttrb"))));
  a.flat = tensor_indices(read_tensor(dir / (prefix + "_flat.ttrb")));
  a.interp = read_tensor(dir / (prefix + "_interp.ttrb")).unfold(1);
  a.factorize();
  return a;
}

}  // namespace

void save_model(const std::string& dir_str, const ReducedModel& rom) {
  const fs::path dir(dir_str);
  fs::create_directories(dir);
  Manifest m;
  m["kind"] = "reduced_model";
  m["method"] = to_string(rom.method);
  m["state_dims"] = join(rom.state_dims);
  m["transient"] = rom.transient ? "1" : "0";
  m["theta"] = fmt_double(rom.theta);
  m["dt"] = fmt_double(rom.dt);
  m["eps"] = fmt_double(rom.eps);
  m["res_snapshot_norm"] = fmt_double(rom.res_snapshot_norm);
  m["jac_snapshot_norm"] = fmt_double(rom.jac_snapshot_norm);
  m["dimension"] = std::to_string(rom.dimension());
  if (rom.method == Method::TT)
    save_tt(dir, "basis", rom.tt, m);
  else
    save_st(dir, "basis", rom.st);
  save_affine(dir, "jac", rom.jac, m);
  save_affine(dir, "res", rom.res, m);
  std::vector<std::size_t> je, re;
  for (const auto& e : rom.jac_entries) je.insert(je.end(), {e.row, e.col, e.step});
  for (const auto& e : rom.res_entries) re.insert(re.end(), {e.row, e.step});
  write_tensor(dir / "jac_entries.ttrb", index_tensor(je));
  write_tensor(dir / "res_entries.ttrb", index_tensor(re));
  write_tensor(dir / "jac_diag.ttrb", rom.jac_diag);
  write_tensor(dir / "res_proj.ttrb", Tensor::from_matrix(rom.res_proj));
  if (rom.transient) {
    write_tensor(dir / "jac_sub.ttrb", rom.jac_sub);
    write_tensor(dir / "mass_sub.ttrb", Tensor::from_matrix(rom.mass_sub));
  }
  write_manifest(dir / "manifest.txt", m);
}

ReducedModel load_model(const std::string& dir_str) {
  const fs::path dir(dir_str);
  const Manifest m = read_manifest(dir / "manifest.txt");
  if (m.at("kind") != "reduced_model") throw FormatError("not a reduced model directory: " + dir_str);
  ReducedModel rom;
  rom.method = parse_method(m.at("method"));
  rom.state_dims = split_list(m.at("state_dims"));
  rom.transient = m.at("transient") == "1";
  rom.theta = std::stod(m.at("theta"));
  rom.dt = std::stod(m.at("dt"));
  rom.eps = std::stod(m.at("eps"));
  rom.res_snapshot_norm = std::stod(m.at("res_snapshot_norm"));
  rom.jac_snapshot_norm = std::stod(m.at("jac_snapshot_norm"));
  if (rom.method == Method::TT)
    rom.tt = load_tt(dir, "basis", m);
  else
    rom.st = load_st(dir, "basis");
  rom.jac = load_affine(dir, "jac", m);
  rom.res = load_affine(dir, "res", m);
  const auto je = tensor_indices(read_tensor(dir / "jac_entries.ttrb"));
  for (std::size_t i = 0; i + 2 < je.size(); i += 3) rom.jac_entries.push_back({je[i], je[i + 1], je[i + 2]});
  const auto re = tensor_indices(read_tensor(dir / "res_entries.ttrb"));
  for (std::size_t i = 0; i + 1 < re.size(); i += 2) rom.res_entries.push_back({re[i], re[i + 1]});
  rom.jac_diag = read_tensor(dir / "jac_diag.ttrb");
  rom.res_proj = read_tensor(dir / "res_proj.ttrb").unfold(1);
  if (rom.transient) {
    rom.jac_sub = read_tensor(dir / "jac_sub.ttrb");
    rom.mass_sub = read_tensor(dir / "mass_sub.ttrb").unfold(1);
  }
  return rom;
}

}  // namespace ttrb
