#include "ttrb/fe.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace ttrb {

namespace {

constexpr double kGaussLo = 0.5 - 0.5 / 1.7320508075688772;
constexpr double kGaussHi = 0.5 + 0.5 / 1.7320508075688772;

double shape(std::size_t off, double xi) { return off ? xi : 1.0 - xi; }
double dshape(std::size_t off) { return off ? 1.0 : -1.0; }

SparseMatrix tridiag_free(const Grid1D& g, double diag_int, double diag_end, double off) {
  const std::size_t n = g.n_free();
  const std::size_t f0 = g.first_free();
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t node = k + f0;
    const bool end = node == 0 || node == g.n_cells;
    t.push_back({k, k, end ? diag_end : diag_int});
    if (k + 1 < n) {
      t.push_back({k, k + 1, off});
      t.push_back({k + 1, k, off});
    }
  }
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

SparseMatrix mass_full(const Grid1D& g) {
  Grid1D all = g;
  all.dirichlet_lo = all.dirichlet_hi = false;
  return mass_1d(all);
}

}  // namespace

CartesianSpace::CartesianSpace(std::vector<Grid1D> grids, std::vector<Facet> neumann)
    : grids_(std::move(grids)), neumann_(std::move(neumann)) {
  if (grids_.empty()) throw std::invalid_argument("space needs at least one direction");
  for (const auto& g : grids_) {
    if (g.n_cells == 0 || !(g.hi > g.lo)) throw std::invalid_argument("degenerate grid");
    if (g.n_free() == 0) throw std::invalid_argument("grid without free nodes");
  }
  for (const auto& f : neumann_) {
    if (f.direction >= grids_.size()) throw std::invalid_argument("Neumann facet direction out of range");
    const auto& g = grids_[f.direction];
    if (f.high ? g.dirichlet_hi : g.dirichlet_lo) throw std::invalid_argument("facet is both Dirichlet and Neumann");
  }
}

std::vector<std::size_t> CartesianSpace::free_dims() const {
  std::vector<std::size_t> d;
  for (const auto& g : grids_) d.push_back(g.n_free());
  return d;
}

std::vector<std::size_t> CartesianSpace::node_dims() const {
  std::vector<std::size_t> d;
  for (const auto& g : grids_) d.push_back(g.n_nodes());
  return d;
}

std::vector<std::size_t> CartesianSpace::cell_dims() const {
  std::vector<std::size_t> d;
  for (const auto& g : grids_) d.push_back(g.n_cells);
  return d;
}

std::size_t CartesianSpace::n_free() const {
  const auto d = free_dims();
  return product(d);
}

std::vector<std::size_t> CartesianSpace::free_to_node(std::size_t free_flat) const {
  auto idx = kron_index_inv(free_dims(), free_flat);
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] += grids_[k].first_free();
  return idx;
}

std::size_t CartesianSpace::node_to_free(std::span<const std::size_t> node) const {
  std::size_t m = 0;
  for (std::size_t k = 0; k < grids_.size(); ++k) {
    const auto& g = grids_[k];
    if (node[k] >= g.n_nodes()) throw std::out_of_range("node index out of range");
    if (g.is_dirichlet(node[k])) return npos;
    m = m * g.n_free() + (node[k] - g.first_free());
  }
  return m;
}

std::vector<double> CartesianSpace::coords(std::span<const std::size_t> node) const {
  std::vector<double> x(grids_.size());
  for (std::size_t k = 0; k < grids_.size(); ++k) x[k] = grids_[k].coord(node[k]);
  return x;
}

SparseMatrix mass_1d(const Grid1D& g) {
  const double h = g.h();
  return tridiag_free(g, 4.0 * h / 6.0, 2.0 * h / 6.0, h / 6.0);
}

SparseMatrix stiffness_1d(const Grid1D& g) {
  const double h = g.h();
  return tridiag_free(g, 2.0 / h, 1.0 / h, -1.0 / h);
}

SparseMatrix pattern_1d(const Grid1D& g) { return tridiag_free(g, 0.0, 0.0, 0.0); }

KroneckerSum::KroneckerSum(std::vector<std::vector<SparseMatrix>> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw std::invalid_argument("KroneckerSum needs at least one term");
  const std::size_t d = terms_.front().size();
  for (const auto& term : terms_) {
    if (term.size() != d) throw ShapeError("KroneckerSum terms differ in order");
    std::vector<Matrix> dense;
    for (std::size_t i = 0; i < d; ++i) {
      if (term[i].rows() != term[i].cols() || term[i].rows() != terms_.front()[i].rows())
        throw ShapeError("KroneckerSum factor shape mismatch");
      dense.push_back(term[i].to_dense());
    }
    dense_.push_back(std::move(dense));
  }
}

std::vector<std::size_t> KroneckerSum::dims() const {
  std::vector<std::size_t> d;
  for (const auto& f : terms_.front()) d.push_back(f.rows());
  return d;
}

SparseMatrix KroneckerSum::expand() const {
  SparseMatrix sum;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    SparseMatrix p = terms_[k][0];
    for (std::size_t i = 1; i < terms_[k].size(); ++i) p = kron_sparse(p, terms_[k][i]);
    sum = k == 0 ? p : add(sum, p);
  }
  return sum;
}

Tensor KroneckerSum::apply(const Tensor& t) const {
  const std::size_t d = order();
  if (t.order() < d) throw ShapeError("KroneckerSum::apply: tensor order too small");
  for (std::size_t i = 0; i < d; ++i)
    if (t.dim(i) != terms_.front()[i].rows()) throw ShapeError("KroneckerSum::apply: dimension mismatch");
  Tensor sum(t.dims());
  for (const auto& term : dense_) {
    Tensor y = t;
    for (std::size_t i = 0; i < d; ++i) y = mode_contract(term[i], y, i);
    for (std::size_t p = 0; p < sum.size(); ++p) sum[p] += y[p];
  }
  return sum;
}

std::vector<double> KroneckerSum::column_norms_sq(const Tensor& t) const {
  const Tensor y = apply(t);
  const Matrix a = t.unfold(order());
  const Matrix b = y.unfold(order());
  std::vector<double> out(static_cast<std::size_t>(a.cols()));
  for (Eigen::Index j = 0; j < a.cols(); ++j) out[static_cast<std::size_t>(j)] = a.col(j).dot(b.col(j));
  return out;
}

KroneckerSum assemble_norm_matrix(const CartesianSpace& space) {
  const std::size_t d = space.dim();
  std::vector<SparseMatrix> m, x;
  for (const auto& g : space.grids()) {
    m.push_back(mass_1d(g));
    x.push_back(stiffness_1d(g));
  }
  std::vector<std::vector<SparseMatrix>> terms(d);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t i = 0; i < d; ++i) terms[k].push_back(i == k ? x[i] : m[i]);
  return KroneckerSum(std::move(terms));
}

struct Assembler::Local {
  std::vector<double> k;
};

Assembler::Assembler(CartesianSpace space) : space_(std::move(space)) {
  d_ = space_.dim();
  n_local_ = std::size_t{1} << d_;
  cell_dims_ = space_.cell_dims();
  node_dims_ = space_.node_dims();

  const std::size_t n_nodes = product(node_dims_);
  node_to_free_.resize(n_nodes);
  for (std::size_t n = 0; n < n_nodes; ++n) {
    const auto idx = kron_index_inv(node_dims_, n);
    node_to_free_[n] = space_.node_to_free(idx);
  }

  node_offset_.assign(n_local_, std::vector<std::size_t>(d_));
  qpt_.assign(n_local_, std::vector<double>(d_));
  for (std::size_t a = 0; a < n_local_; ++a)
    for (std::size_t k = 0; k < d_; ++k) {
      node_offset_[a][k] = (a >> (d_ - 1 - k)) & 1U;
      qpt_[a][k] = node_offset_[a][k] ? kGaussHi : kGaussLo;
    }
  phi_.resize(n_local_ * n_local_);
  dphi_.resize(n_local_ * n_local_ * d_);
  for (std::size_t q = 0; q < n_local_; ++q)
    for (std::size_t a = 0; a < n_local_; ++a) {
      double v = 1.0;
      for (std::size_t k = 0; k < d_; ++k) v *= shape(node_offset_[a][k], qpt_[q][k]);
      phi_[q * n_local_ + a] = v;
      for (std::size_t k = 0; k < d_; ++k) {
        double g = dshape(node_offset_[a][k]);
        for (std::size_t j = 0; j < d_; ++j)
          if (j != k) g *= shape(node_offset_[a][j], qpt_[q][j]);
        dphi_[(q * n_local_ + a) * d_ + k] = g;
      }
    }

  for (const auto& g : space_.grids()) mass1d_full_.push_back(mass_full(g));

  std::vector<Triplet> trip;
  const std::size_t n_cells = product(cell_dims_);
  for (std::size_t c = 0; c < n_cells; ++c) {
    const auto nodes = cell_nodes(c);
    for (auto na : nodes) {
      const auto fa = node_to_free_[na];
      if (fa == CartesianSpace::npos) continue;
      for (auto nb : nodes) {
        const auto fb = node_to_free_[nb];
        if (fb != CartesianSpace::npos) trip.push_back({fa, fb, 0.0});
      }
    }
  }
  const std::size_t n = space_.n_free();
  pattern_ = SparseMatrix::from_triplets(n, n, std::move(trip));
  pattern_cols_ = pattern_.col_indices();
}

std::vector<std::size_t> Assembler::cell_nodes(std::size_t cell) const {
  const auto c = kron_index_inv(cell_dims_, cell);
  std::vector<std::size_t> nodes(n_local_);
  std::vector<std::size_t> idx(d_);
  for (std::size_t a = 0; a < n_local_; ++a) {
    for (std::size_t k = 0; k < d_; ++k) idx[k] = c[k] + node_offset_[a][k];
    nodes[a] = kron_index(node_dims_, idx);
  }
  return nodes;
}

std::vector<std::size_t> Assembler::cells_of_node(std::span<const std::size_t> node) const {
  std::vector<std::size_t> cells{0};
  for (std::size_t k = 0; k < d_; ++k) {
    std::vector<std::size_t> next;
    for (auto base : cells)
      for (std::size_t off = 0; off < 2; ++off) {
        if (node[k] + off < 1) continue;
        const std::size_t ck = node[k] + off - 1;
        if (ck >= cell_dims_[k]) continue;
        next.push_back(base * cell_dims_[k] + ck);
      }
    cells = std::move(next);
  }
  return cells;
}

Assembler::Local Assembler::local_stiffness(std::size_t cell, const Field& alpha, double t,
                                            std::span<const double> mu) const {
  const auto c = kron_index_inv(cell_dims_, cell);
  Local loc;
  loc.k.assign(n_local_ * n_local_, 0.0);
  std::vector<double> x(d_), inv_h(d_);
  double w = 1.0;
  for (std::size_t k = 0; k < d_; ++k) {
    const auto& g = space_.grid(k);
    w *= 0.5 * g.h();
    inv_h[k] = 1.0 / g.h();
  }
  for (std::size_t q = 0; q < n_local_; ++q) {
    for (std::size_t k = 0; k < d_; ++k) {
      const auto& g = space_.grid(k);
      x[k] = g.lo + (static_cast<double>(c[k]) + qpt_[q][k]) * g.h();
    }
    const double wa = w * alpha(x, t, mu);
    for (std::size_t a = 0; a < n_local_; ++a) {
      const double* ga = &dphi_[(q * n_local_ + a) * d_];
      for (std::size_t b = 0; b < n_local_; ++b) {
        const double* gb = &dphi_[(q * n_local_ + b) * d_];
        double s = 0.0;
        for (std::size_t k = 0; k < d_; ++k) s += ga[k] * gb[k] * inv_h[k] * inv_h[k];
        loc.k[a * n_local_ + b] += wa * s;
      }
    }
  }
  return loc;
}

SparseMatrix Assembler::stiffness(const Field& alpha, double t, std::span<const double> mu) const {
  std::vector<double> v(pattern_.nnz(), 0.0);
  const std::size_t n_cells = product(cell_dims_);
  for (std::size_t c = 0; c < n_cells; ++c) {
    const auto nodes = cell_nodes(c);
    const auto loc = local_stiffness(c, alpha, t, mu);
    for (std::size_t a = 0; a < n_local_; ++a) {
      const auto fa = node_to_free_[nodes[a]];
      if (fa == CartesianSpace::npos) continue;
      for (std::size_t b = 0; b < n_local_; ++b) {
        const auto fb = node_to_free_[nodes[b]];
        if (fb == CartesianSpace::npos) continue;
        v[*pattern_.find(fa, fb)] += loc.k[a * n_local_ + b];
      }
    }
  }
  return pattern_.with_values(std::move(v));
}

SparseMatrix Assembler::mass() const {
  std::vector<Entry> entries(pattern_.nnz());
  for (std::size_t p = 0; p < pattern_.nnz(); ++p) entries[p] = {pattern_.row_indices()[p], pattern_cols_[p]};
  return pattern_.with_values(mass_entries(entries));
}

template <class Sink>
void Assembler::load_cells(std::span<const std::size_t> cells, const Field& f, const Field& h, double t,
                           std::span<const double> mu, Sink&& sink) const {
  std::vector<double> x(d_);
  double w = 1.0;
  for (std::size_t k = 0; k < d_; ++k) w *= 0.5 * space_.grid(k).h();
  for (auto cell : cells) {
    const auto c = kron_index_inv(cell_dims_, cell);
    const auto nodes = cell_nodes(cell);
    std::vector<double> fl(n_local_, 0.0);
    if (f) {
      for (std::size_t q = 0; q < n_local_; ++q) {
        for (std::size_t k = 0; k < d_; ++k) {
          const auto& g = space_.grid(k);
          x[k] = g.lo + (static_cast<double>(c[k]) + qpt_[q][k]) * g.h();
        }
        const double wf = w * f(x, t, mu);
        for (std::size_t a = 0; a < n_local_; ++a) fl[a] += wf * phi_[q * n_local_ + a];
      }
    }
    if (h) {
      for (const auto& facet : space_.neumann_facets()) {
        const std::size_t k = facet.direction;
        if (c[k] != (facet.high ? cell_dims_[k] - 1 : 0)) continue;
        const double wf = w / (0.5 * space_.grid(k).h());
        const double xi_k = facet.high ? 1.0 : 0.0;
        for (std::size_t q = 0; q < n_local_; ++q) {
          if (node_offset_[q][k] != 0) continue;
          for (std::size_t j = 0; j < d_; ++j) {
            const auto& g = space_.grid(j);
            const double xi = j == k ? xi_k : qpt_[q][j];
            x[j] = g.lo + (static_cast<double>(c[j]) + xi) * g.h();
          }
          const double hv = wf * h(x, t, mu);
          for (std::size_t a = 0; a < n_local_; ++a) {
            double v = 1.0;
            for (std::size_t j = 0; j < d_; ++j)
              v *= shape(node_offset_[a][j], j == k ? xi_k : qpt_[q][j]);
            fl[a] += hv * v;
          }
        }
      }
    }
    for (std::size_t a = 0; a < n_local_; ++a) {
      const auto fa = node_to_free_[nodes[a]];
      if (fa != CartesianSpace::npos) sink(fa, fl[a]);
    }
  }
}

template <class Sink>
void Assembler::lifting_cells(std::span<const std::size_t> cells, const Field& alpha, const Field& g, double t,
                              std::span<const double> mu, Sink&& sink) const {
  std::vector<double> gv(n_local_);
  for (auto cell : cells) {
    const auto nodes = cell_nodes(cell);
    bool any = false;
    for (std::size_t b = 0; b < n_local_; ++b) {
      if (node_to_free_[nodes[b]] != CartesianSpace::npos) continue;
      any = true;
      const auto x = space_.coords(kron_index_inv(node_dims_, nodes[b]));
      gv[b] = g(x, t, mu);
    }
    if (!any) continue;
    const auto loc = local_stiffness(cell, alpha, t, mu);
    for (std::size_t a = 0; a < n_local_; ++a) {
      const auto fa = node_to_free_[nodes[a]];
      if (fa == CartesianSpace::npos) continue;
      double s = 0.0;
      for (std::size_t b = 0; b < n_local_; ++b)
        if (node_to_free_[nodes[b]] == CartesianSpace::npos) s += loc.k[a * n_local_ + b] * gv[b];
      sink(fa, s);
    }
  }
}

namespace {

std::vector<std::size_t> all_cells(std::size_t n) {
  std::vector<std::size_t> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = i;
  return c;
}

/// Accumulates into requested rows only.
struct RowSink {
  std::unordered_map<std::size_t, std::vector<std::size_t>> slots;
  std::vector<double> out;

  explicit RowSink(std::span<const std::size_t> rows) : out(rows.size(), 0.0) {
    for (std::size_t i = 0; i < rows.size(); ++i) slots[rows[i]].push_back(i);
  }
  void operator()(std::size_t row, double v) {
    auto it = slots.find(row);
    if (it == slots.end()) return;
    for (auto s : it->second) out[s] += v;
  }
};

}  // namespace

Vector Assembler::load(const Field& f, const Field& h, double t, std::span<const double> mu) const {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(space_.n_free()));
  const auto cells = all_cells(product(cell_dims_));
  load_cells(cells, f, h, t, mu, [&](std::size_t r, double x) { v[static_cast<Eigen::Index>(r)] += x; });
  return v;
}

Vector Assembler::stiffness_lifting(const Field& alpha, const Field& g, double t, std::span<const double> mu) const {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(space_.n_free()));
  const auto cells = all_cells(product(cell_dims_));
  lifting_cells(cells, alpha, g, t, mu, [&](std::size_t r, double x) { v[static_cast<Eigen::Index>(r)] += x; });
  return v;
}

Vector Assembler::mass_lifting(const Field& g, double t, std::span<const double> mu) const {
  std::vector<std::size_t> rows(space_.n_free());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const auto v = mass_lifting_rows(g, t, mu, rows);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> Assembler::stiffness_entries(const Field& alpha, double t, std::span<const double> mu,
                                                 std::span<const Entry> entries) const {
  std::unordered_map<std::size_t, Local> memo;
  std::vector<double> out(entries.size(), 0.0);
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto nr = space_.free_to_node(entries[e].first);
    const auto nc = space_.free_to_node(entries[e].second);
    bool adjacent = true;
    for (std::size_t k = 0; k < d_; ++k)
      if (nr[k] + 1 < nc[k] || nc[k] + 1 < nr[k]) adjacent = false;
    if (!adjacent) continue;
    for (auto cell : cells_of_node(nr)) {
      const auto c = kron_index_inv(cell_dims_, cell);
      std::size_t a = 0, b = 0;
      bool inside = true;
      for (std::size_t k = 0; k < d_; ++k) {
        if (nc[k] < c[k] || nc[k] > c[k] + 1) inside = false;
        a = (a << 1) | (nr[k] - c[k]);
        b = (b << 1) | (nc[k] - c[k]);
      }
      if (!inside) continue;
      auto it = memo.find(cell);
      if (it == memo.end()) it = memo.emplace(cell, local_stiffness(cell, alpha, t, mu)).first;
      out[e] += it->second.k[a * n_local_ + b];
    }
  }
  return out;
}

std::vector<double> Assembler::mass_entries(std::span<const Entry> entries) const {
  std::vector<double> out(entries.size());
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto nr = space_.free_to_node(entries[e].first);
    const auto nc = space_.free_to_node(entries[e].second);
    double v = 1.0;
    for (std::size_t k = 0; k < d_ && v != 0.0; ++k) v *= mass1d_full_[k].coeff(nr[k], nc[k]);
    out[e] = v;
  }
  return out;
}

std::vector<double> Assembler::load_rows(const Field& f, const Field& h, double t, std::span<const double> mu,
                                         std::span<const std::size_t> rows) const {
  std::vector<std::size_t> cells;
  for (auto r : rows) {
    const auto c = cells_of_node(space_.free_to_node(r));
    cells.insert(cells.end(), c.begin(), c.end());
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  RowSink sink(rows);
  load_cells(cells, f, h, t, mu, sink);
  return std::move(sink.out);
}

std::vector<double> Assembler::stiffness_lifting_rows(const Field& alpha, const Field& g, double t,
                                                      std::span<const double> mu,
                                                      std::span<const std::size_t> rows) const {
  std::vector<std::size_t> cells;
  for (auto r : rows) {
    const auto c = cells_of_node(space_.free_to_node(r));
    cells.insert(cells.end(), c.begin(), c.end());
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  RowSink sink(rows);
  lifting_cells(cells, alpha, g, t, mu, sink);
  return std::move(sink.out);
}

std::vector<double> Assembler::mass_lifting_rows(const Field& g, double t, std::span<const double> mu,
                                                 std::span<const std::size_t> rows) const {
  std::vector<double> out(rows.size(), 0.0);
  std::vector<std::size_t> nb(d_);
  const std::size_t n_nb = static_cast<std::size_t>(std::pow(3.0, static_cast<double>(d_)));
  for (std::size_t e = 0; e < rows.size(); ++e) {
    const auto nr = space_.free_to_node(rows[e]);
    for (std::size_t s = 0; s < n_nb; ++s) {
      std::size_t code = s;
      bool ok = true;
      for (std::size_t k = d_; k-- > 0;) {
        const std::size_t off = code % 3;
        code /= 3;
        if (nr[k] + off < 1 || nr[k] + off - 1 >= node_dims_[k]) ok = false;
        nb[k] = nr[k] + off - 1;
      }
      if (!ok || space_.node_to_free(nb) != CartesianSpace::npos) continue;
      double m = 1.0;
      for (std::size_t k = 0; k < d_; ++k) m *= mass1d_full_[k].coeff(nr[k], nb[k]);
      out[e] += m * g(space_.coords(nb), t, mu);
    }
  }
  return out;
}

Tensor Assembler::interpolate(const Field& g, double t, std::span<const double> mu) const {
  Tensor out(node_dims_);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = g(space_.coords(kron_index_inv(node_dims_, n)), t, mu);
  return out;
}

SparseMatrix assemble_diffusion(const CartesianSpace& space, const Field& alpha, double t,
                                std::span<const double> mu) {
  return Assembler(space).stiffness(alpha, t, mu);
}

Vector assemble_rhs(const CartesianSpace& space, const Field& f, const Field& g, const Field& h,
                    const Field& alpha, double t, std::span<const double> mu) {
  const Assembler a(space);
  Vector rhs = a.load(f, h, t, mu);
  if (g) rhs -= a.stiffness_lifting(alpha, g, t, mu);
  return rhs;
}

SparsityMap::SparsityMap(const CartesianSpace& space, const SparseMatrix& pattern) {
  const std::size_t d = space.dim();
  free_dims_ = space.free_dims();
  for (std::size_t i = 0; i < d; ++i) {
    patterns_.push_back(ttrb::pattern_1d(space.grid(i)));
    split_dims_.push_back(patterns_.back().nnz());
    cols_1d_.push_back(patterns_.back().col_indices());
  }
  rows_ = pattern.row_indices();
  cols_ = pattern.col_indices();
  const std::size_t nz = product(split_dims_);
  to_global_.assign(nz, npos);
  from_split_.assign(pattern.nnz(), npos);
  std::vector<std::size_t> r(d), c(d);
  for (std::size_t f = 0; f < nz; ++f) {
    const auto z = kron_index_inv(split_dims_, f);
    for (std::size_t i = 0; i < d; ++i) {
      r[i] = patterns_[i].row_indices()[z[i]];
      c[i] = cols_1d_[i][z[i]];
    }
    const auto pos = pattern.find(kron_index(free_dims_, r), kron_index(free_dims_, c));
    if (!pos) continue;
    to_global_[f] = *pos;
    from_split_[*pos] = f;
  }
  for (auto s : from_split_)
    if (s == npos) throw std::logic_error("sparsity pattern is not a tensor product of 1-D patterns");
}

std::pair<std::size_t, std::size_t> SparsityMap::entry_1d(std::size_t axis, std::size_t z) const {
  return {patterns_.at(axis).row_indices().at(z), cols_1d_.at(axis).at(z)};
}

std::pair<std::size_t, std::size_t> SparsityMap::entry_of_split(std::size_t split_flat) const {
  const auto z = kron_index_inv(split_dims_, split_flat);
  std::vector<std::size_t> r(z.size()), c(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) std::tie(r[i], c[i]) = entry_1d(i, z[i]);
  return {kron_index(free_dims_, r), kron_index(free_dims_, c)};
}

std::pair<std::size_t, std::size_t> SparsityMap::entry_of_global(std::size_t global_pos) const {
  return {rows_.at(global_pos), cols_.at(global_pos)};
}

SparsityMap sparsity_map(const CartesianSpace& space) { return SparsityMap(space, Assembler(space).pattern()); }

}  // namespace ttrb
