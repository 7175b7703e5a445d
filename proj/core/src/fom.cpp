#include "ttrb/fom.hpp"

#include "ttrb/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace ttrb {

namespace {

constexpr std::size_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

}  // namespace

bool ParameterBox::contains(std::span<const double> mu) const {
  if (mu.size() != lo.size()) return false;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu[i] < lo[i] || mu[i] > hi[i]) return false;
  return true;
}

double radical_inverse(std::size_t index, std::size_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

Parameter halton(std::size_t index, const ParameterBox& box) {
  if (box.size() > std::size(kPrimes)) throw std::invalid_argument("halton: too many parameters");
  Parameter mu(box.size());
  for (std::size_t i = 0; i < box.size(); ++i)
    mu[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * radical_inverse(index, kPrimes[i]);
  return mu;
}

std::vector<Parameter> halton_points(std::size_t n, const ParameterBox& box, std::size_t start) {
  std::vector<Parameter> pts;
  for (std::size_t j = 0; j < n; ++j) pts.push_back(halton(start + j, box));
  return pts;
}

std::vector<Parameter> uniform_points(std::size_t n, const ParameterBox& box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Parameter> pts(n, Parameter(box.size()));
  for (auto& mu : pts)
    for (std::size_t i = 0; i < box.size(); ++i) {
      // 53-bit uniform in [0,1), independent of the standard library's distributions.
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      mu[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * u;
    }
  return pts;
}

FullOrderModel::FullOrderModel(ProblemSpec spec)
    : spec_(std::move(spec)), asm_(spec_.space), map_(spec_.space, asm_.pattern()),
      norm_(assemble_norm_matrix(spec_.space)), mass_(asm_.mass()) {
  if (!spec_.alpha) throw std::invalid_argument("problem needs a diffusion coefficient");
  if (spec_.transient() && !(spec_.final_time > 0.0)) throw std::invalid_argument("transient problem needs T > 0");
  if (spec_.theta <= 0.0 || spec_.theta > 1.0) throw std::invalid_argument("theta must lie in (0, 1]");
}

std::vector<std::size_t> FullOrderModel::state_dims() const {
  auto d = spec_.space.free_dims();
  if (spec_.transient()) d.push_back(spec_.n_steps);
  return d;
}

SparseMatrix FullOrderModel::stiffness(std::span<const double> mu, double t) const {
  return asm_.stiffness(spec_.alpha, t, mu);
}

SparseMatrix FullOrderModel::jacobian(std::span<const double> mu, std::size_t step) const {
  if (!spec_.transient()) return stiffness(mu, 0.0);
  const SparseMatrix a = stiffness(mu, time(step));
  std::vector<double> v(a.nnz());
  const double inv_dt = 1.0 / spec_.dt();
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = inv_dt * mass_.values()[p] + spec_.theta * a.values()[p];
  return a.with_values(std::move(v));
}

Vector FullOrderModel::ell(std::span<const double> mu, double t) const {
  Vector v = asm_.load(spec_.f, spec_.h, t, mu);
  if (spec_.g) v -= asm_.stiffness_lifting(spec_.alpha, spec_.g, t, mu);
  return v;
}

Vector FullOrderModel::initial_free(std::span<const double> mu) const {
  const std::size_t n = spec_.space.n_free();
  Vector u = Vector::Zero(static_cast<Eigen::Index>(n));
  if (!spec_.u0) return u;
  for (std::size_t i = 0; i < n; ++i)
    u[static_cast<Eigen::Index>(i)] = spec_.u0(spec_.space.coords(spec_.space.free_to_node(i)), 0.0, mu);
  return u;
}

Vector FullOrderModel::residual(std::span<const double> mu, std::size_t step) const {
  if (!spec_.transient()) return ell(mu, 0.0);
  if (step >= spec_.n_steps) throw std::out_of_range("residual step out of range");
  const double th = spec_.theta;
  const double dt = spec_.dt();
  const double t1 = time(step);
  const double t0 = t1 - dt;
  Vector r = th * ell(mu, t1);
  if (th < 1.0) r += (1.0 - th) * ell(mu, t0);
  if (spec_.g) r -= (asm_.mass_lifting(spec_.g, t1, mu) - asm_.mass_lifting(spec_.g, t0, mu)) / dt;
  if (step == 0 && spec_.u0) {
    const Vector u0 = initial_free(mu);
    r += (mass_ * u0) / dt;
    if (th < 1.0) r -= (1.0 - th) * (stiffness(mu, 0.0) * u0);
  }
  return r;
}

FullOrderModel::Result FullOrderModel::solve(std::span<const double> mu, bool with_residual,
                                             bool with_jacobian) const {
  Result out;
  const auto dims = state_dims();
  out.solution = Tensor(dims);
  if (with_residual) out.residual = Tensor(dims);
  const std::size_t n = spec_.space.n_free();
  const auto ni = static_cast<Eigen::Index>(n);

  if (!spec_.transient()) {
    const SparseMatrix a = stiffness(mu, 0.0);
    const Vector rhs = ell(mu, 0.0);
    const Vector u = cholesky(a).solve(rhs);
    Eigen::Map<Vector>(out.solution.data().data(), ni) = u;
    if (with_residual) Eigen::Map<Vector>(out.residual.data().data(), ni) = rhs;
    if (with_jacobian) out.jacobian.push_back(a.values());
    return out;
  }

  const std::size_t nt = spec_.n_steps;
  const double dt = spec_.dt();
  const double th = spec_.theta;
  Vector u_prev = initial_free(mu);
  SparseMatrix a_prev = stiffness(mu, 0.0);
  Vector ell_prev = ell(mu, 0.0);
  Vector glift_prev = spec_.g ? asm_.mass_lifting(spec_.g, 0.0, mu) : Vector::Zero(ni);
  CholeskyFactor factor;
  bool factored = false;
  RowMatrix u_all(ni, static_cast<Eigen::Index>(nt));
  RowMatrix r_all;
  if (with_residual) r_all.resize(ni, static_cast<Eigen::Index>(nt));

  for (std::size_t s = 0; s < nt; ++s) {
    const double t1 = time(s);
    const SparseMatrix a = spec_.alpha_time_dependent ? stiffness(mu, t1) : a_prev;
    const Vector ell1 = ell(mu, t1);
    const Vector glift = spec_.g ? asm_.mass_lifting(spec_.g, t1, mu) : Vector::Zero(ni);

    Vector block = th * ell1 - (glift - glift_prev) / dt;
    if (th < 1.0) block += (1.0 - th) * ell_prev;
    Vector carry = (mass_ * u_prev) / dt;
    if (th < 1.0) carry -= (1.0 - th) * (a_prev * u_prev);
    if (s == 0) block += carry;  // initial condition belongs to the first block
    const Vector rhs = s == 0 ? block : Vector(block + carry);

    std::vector<double> jv(a.nnz());
    for (std::size_t p = 0; p < jv.size(); ++p) jv[p] = mass_.values()[p] / dt + th * a.values()[p];
    if (spec_.alpha_time_dependent || !factored) {
      factor = cholesky(a.with_values(jv));
      factored = true;
    }
    const Vector u = factor.solve(rhs);
    u_all.col(static_cast<Eigen::Index>(s)) = u;
    if (with_residual) r_all.col(static_cast<Eigen::Index>(s)) = block;
    if (with_jacobian) out.jacobian.push_back(std::move(jv));

    u_prev = u;
    a_prev = a;
    ell_prev = ell1;
    glift_prev = glift;
  }
  std::copy(u_all.data(), u_all.data() + u_all.size(), out.solution.data().begin());
  if (with_residual) std::copy(r_all.data(), r_all.data() + r_all.size(), out.residual.data().begin());
  return out;
}

std::vector<double> FullOrderModel::jacobian_entries(std::span<const double> mu,
                                                     std::span<const JacobianEntry> e) const {
  std::map<std::size_t, std::vector<std::size_t>> by_step;
  for (std::size_t k = 0; k < e.size(); ++k) by_step[spec_.transient() ? e[k].step : 0].push_back(k);
  std::vector<double> out(e.size());
  for (const auto& [step, ks] : by_step) {
    std::vector<Assembler::Entry> rc;
    for (auto k : ks) rc.emplace_back(e[k].row, e[k].col);
    const auto a = asm_.stiffness_entries(spec_.alpha, time(step), mu, rc);
    if (!spec_.transient()) {
      for (std::size_t j = 0; j < ks.size(); ++j) out[ks[j]] = a[j];
      continue;
    }
    const auto m = asm_.mass_entries(rc);
    for (std::size_t j = 0; j < ks.size(); ++j) out[ks[j]] = m[j] / spec_.dt() + spec_.theta * a[j];
  }
  return out;
}

std::vector<double> FullOrderModel::residual_entries(std::span<const double> mu,
                                                     std::span<const ResidualEntry> e) const {
  // Group rows by the time at which each ingredient is needed.
  std::map<double, std::vector<std::size_t>> ell_rows, lift_rows;
  for (const auto& x : e) {
    const double t1 = time(x.step);
    ell_rows[t1].push_back(x.row);
    if (spec_.transient()) {
      ell_rows[t1 - spec_.dt()].push_back(x.row);
      lift_rows[t1].push_back(x.row);
      lift_rows[t1 - spec_.dt()].push_back(x.row);
    }
  }
  std::map<std::pair<double, std::size_t>, double> ell_val, lift_val;
  for (auto& [t, rows] : ell_rows) {
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    auto v = asm_.load_rows(spec_.f, spec_.h, t, mu, rows);
    if (spec_.g) {
      const auto l = asm_.stiffness_lifting_rows(spec_.alpha, spec_.g, t, mu, rows);
      for (std::size_t j = 0; j < v.size(); ++j) v[j] -= l[j];
    }
    for (std::size_t j = 0; j < rows.size(); ++j) ell_val[{t, rows[j]}] = v[j];
  }
  if (spec_.g)
    for (auto& [t, rows] : lift_rows) {
      std::sort(rows.begin(), rows.end());
      rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
      const auto v = asm_.mass_lifting_rows(spec_.g, t, mu, rows);
      for (std::size_t j = 0; j < rows.size(); ++j) lift_val[{t, rows[j]}] = v[j];
    }

  std::vector<double> out(e.size());
  if (!spec_.transient()) {
    for (std::size_t k = 0; k < e.size(); ++k) out[k] = ell_val.at({0.0, e[k].row});
    return out;
  }
  const double th = spec_.theta;
  const double dt = spec_.dt();
  const std::size_t d = spec_.space.dim();
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double t1 = time(e[k].step);
    const double t0 = t1 - dt;
    double v = th * ell_val.at({t1, e[k].row});
    if (th < 1.0) v += (1.0 - th) * ell_val.at({t0, e[k].row});
    if (spec_.g) v -= (lift_val.at({t1, e[k].row}) - lift_val.at({t0, e[k].row})) / dt;
    if (e[k].step == 0 && spec_.u0) {
      // (M/dt - (1 - theta) A(0)) u0 restricted to row e[k].row.
      const auto node = spec_.space.free_to_node(e[k].row);
      std::vector<Assembler::Entry> rc;
      std::vector<double> u0;
      const std::size_t n_nb = static_cast<std::size_t>(std::pow(3.0, static_cast<double>(d)));
      std::vector<std::size_t> nb(d);
      for (std::size_t s = 0; s < n_nb; ++s) {
        std::size_t code = s;
        bool ok = true;
        for (std::size_t i = d; i-- > 0;) {
          const std::size_t off = code % 3;
          code /= 3;
          if (node[i] + off < 1 || node[i] + off - 1 >= spec_.space.grid(i).n_nodes()) ok = false;
          nb[i] = node[i] + off - 1;
        }
        if (!ok) continue;
        const auto f = spec_.space.node_to_free(nb);
        if (f == CartesianSpace::npos) continue;
        rc.emplace_back(e[k].row, f);
        u0.push_back(spec_.u0(spec_.space.coords(nb), 0.0, mu));
      }
      const auto m = asm_.mass_entries(rc);
      const auto a = asm_.stiffness_entries(spec_.alpha, 0.0, mu, rc);
      for (std::size_t j = 0; j < rc.size(); ++j) v += (m[j] / dt - (1.0 - th) * a[j]) * u0[j];
    }
    out[k] = v;
  }
  return out;
}

SparseMatrix FullOrderModel::space_time_operator(std::span<const double> mu) const {
  const std::size_t n = spec_.space.n_free();
  const std::size_t nt = n_time();
  std::vector<Triplet> t;
  const auto cols = asm_.pattern().col_indices();
  const auto& rows = asm_.pattern().row_indices();
  for (std::size_t s = 0; s < nt; ++s) {
    const SparseMatrix j = jacobian(mu, s);
    for (std::size_t p = 0; p < j.nnz(); ++p) t.push_back({s * n + rows[p], s * n + cols[p], j.values()[p]});
    if (s == 0) continue;
    const SparseMatrix a = stiffness(mu, time(s - 1));
    for (std::size_t p = 0; p < a.nnz(); ++p) {
      const double v = mass_.values()[p] / spec_.dt() - (1.0 - spec_.theta) * a.values()[p];
      t.push_back({s * n + rows[p], (s - 1) * n + cols[p], -v});
    }
  }
  return SparseMatrix::from_triplets(n * nt, n * nt, std::move(t));
}

Tensor FullOrderModel::full_field(const Tensor& state, std::span<const double> mu) const {
  const auto node_dims = spec_.space.node_dims();
  const std::size_t nn = product(node_dims);
  const std::size_t nt = n_time();
  if (state.size() != spec_.space.n_free() * nt) throw ShapeError("full_field: state size mismatch");
  auto dims = node_dims;
  if (spec_.transient()) dims.push_back(nt);
  Tensor out(dims);
  for (std::size_t node = 0; node < nn; ++node) {
    const auto idx = kron_index_inv(node_dims, node);
    const auto f = spec_.space.node_to_free(idx);
    const auto x = spec_.space.coords(idx);
    for (std::size_t s = 0; s < nt; ++s)
      out[node * nt + s] = f != CartesianSpace::npos ? state[f * nt + s] : (spec_.g ? spec_.g(x, time(s), mu) : 0.0);
  }
  return out;
}

SnapshotSet generate_snapshots(const FullOrderModel& fom, const std::vector<Parameter>& params, std::size_t n_hyper,
                               unsigned threads) {
  SnapshotSet out;
  out.params = params;
  out.n_hyper = std::min(n_hyper, params.size());
  const auto sdims = fom.state_dims();
  const std::size_t ns = product(sdims);
  const std::size_t np = params.size();
  const std::size_t nz = fom.assembler().pattern().nnz();
  const std::size_t nt = fom.n_time();

  auto with_count = [](std::vector<std::size_t> d, std::size_t n) {
    d.push_back(n);
    return d;
  };
  out.solutions = Tensor(with_count(sdims, np));
  out.residuals = Tensor(with_count(sdims, out.n_hyper));
  std::vector<std::size_t> jd{nz};
  if (fom.spec().transient()) jd.push_back(nt);
  out.jacobians = Tensor(with_count(jd, out.n_hyper));

  // Each parameter writes only its own column, so results do not depend on scheduling.
  auto work = [&](std::size_t j) {
    const bool hyper = j < out.n_hyper;
    const auto r = fom.solve(params[j], hyper, hyper);
    for (std::size_t i = 0; i < ns; ++i) out.solutions[i * np + j] = r.solution[i];
    if (!hyper) return;
    for (std::size_t i = 0; i < ns; ++i) out.residuals[i * out.n_hyper + j] = r.residual[i];
    for (std::size_t s = 0; s < nt; ++s)
      for (std::size_t z = 0; z < nz; ++z) out.jacobians[(z * nt + s) * out.n_hyper + j] = r.jacobian[s][z];
  };

  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, np));
  if (threads <= 1) {
    for (std::size_t j = 0; j < np; ++j) work(j);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t j; (j = next.fetch_add(1)) < np;) {
        try {
          work(j);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

namespace {

std::string join_params(const std::vector<Parameter>& ps) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t j = 0; j < ps.size(); ++j) {
    if (j) os << ';';
    for (std::size_t i = 0; i < ps[j].size(); ++i) os << (i ? "," : "") << ps[j][i];
  }
  return os.str();
}

std::vector<Parameter> split_params(const std::string& s) {
  std::vector<Parameter> ps;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ';')) {
    Parameter p;
    std::istringstream it(item);
    std::string v;
    while (std::getline(it, v, ',')) p.push_back(std::stod(v));
    ps.push_back(std::move(p));
  }
  return ps;
}

}  // namespace

void save_snapshots(const std::string& dir, const SnapshotSet& s) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_tensor(fs::path(dir) / "solutions.ttrb", s.solutions);
  write_tensor(fs::path(dir) / "residuals.ttrb", s.residuals);
  write_tensor(fs::path(dir) / "jacobians.ttrb", s.jacobians);
  Manifest m;
  m["kind"] = "snapshots";
  m["n_params"] = std::to_string(s.params.size());
  m["n_hyper"] = std::to_string(s.n_hyper);
  m["params"] = join_params(s.params);
  write_manifest(fs::path(dir) / "manifest.txt", m);
}

SnapshotSet load_snapshots(const std::string& dir) {
  namespace fs = std::filesystem;
  const auto m = read_manifest(fs::path(dir) / "manifest.txt");
  if (m.at("kind") != "snapshots") throw FormatError("not a snapshot directory: " + dir);
  SnapshotSet s;
  s.params = split_params(m.at("params"));
  s.n_hyper = std::stoul(m.at("n_hyper"));
  s.solutions = read_tensor(fs::path(dir) / "solutions.ttrb");
  s.residuals = read_tensor(fs::path(dir) / "residuals.ttrb");
  s.jacobians = read_tensor(fs::path(dir) / "jacobians.ttrb");
  return s;
}

}  // namespace ttrb
