#pragma once

#include "ttrb/sparse.hpp"
#include "ttrb/tensor.hpp"

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace ttrb {

/// Uniform 1-D grid of Q1 nodes. Dirichlet ends are eliminated strongly, so
/// free node k is grid node k + first_free().
struct Grid1D {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n_cells = 1;
  bool dirichlet_lo = false;
  bool dirichlet_hi = false;

  double h() const noexcept { return (hi - lo) / static_cast<double>(n_cells); }
  std::size_t n_nodes() const noexcept { return n_cells + 1; }
  std::size_t n_free() const noexcept { return n_nodes() - (dirichlet_lo ? 1 : 0) - (dirichlet_hi ? 1 : 0); }
  std::size_t first_free() const noexcept { return dirichlet_lo ? 1 : 0; }
  bool is_dirichlet(std::size_t node) const noexcept {
    return (dirichlet_lo && node == 0) || (dirichlet_hi && node == n_cells);
  }
  double coord(std::size_t node) const noexcept { return lo + static_cast<double>(node) * h(); }
};

/// Boundary face {x_direction = lo or hi}.
struct Facet {
  std::size_t direction = 0;
  bool high = false;
};

/// Tensor-product Q1 space on a box. Free dofs are ordered lexicographically
/// with direction 0 slowest.
class CartesianSpace {
 public:
  CartesianSpace() = default;
  CartesianSpace(std::vector<Grid1D> grids, std::vector<Facet> neumann = {});

  std::size_t dim() const noexcept { return grids_.size(); }
  const Grid1D& grid(std::size_t k) const { return grids_.at(k); }
  const std::vector<Grid1D>& grids() const noexcept { return grids_; }
  const std::vector<Facet>& neumann_facets() const noexcept { return neumann_; }

  std::vector<std::size_t> free_dims() const;
  std::vector<std::size_t> node_dims() const;
  std::vector<std::size_t> cell_dims() const;
  std::size_t n_free() const;

  /// Multi-index of grid nodes for a free flat index.
  std::vector<std::size_t> free_to_node(std::size_t free_flat) const;
  /// Free flat index of a grid node, or npos for Dirichlet nodes.
  std::size_t node_to_free(std::span<const std::size_t> node) const;
  std::vector<double> coords(std::span<const std::size_t> node) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<Grid1D> grids_;
  std::vector<Facet> neumann_;
};

/// 1-D matrices restricted to free nodes: mass (h/6)[1,4,1], stiffness (1/h)[-1,2,-1].
SparseMatrix mass_1d(const Grid1D& g);
SparseMatrix stiffness_1d(const Grid1D& g);
/// Tridiagonal free-node pattern with zero values.
SparseMatrix pattern_1d(const Grid1D& g);

/// sum_k kron_i Y^k_i with the first factor slowest.
class KroneckerSum {
 public:
  KroneckerSum() = default;
  explicit KroneckerSum(std::vector<std::vector<SparseMatrix>> terms);

  std::size_t n_terms() const noexcept { return terms_.size(); }
  std::size_t order() const noexcept { return terms_.empty() ? 0 : terms_.front().size(); }
  const SparseMatrix& factor(std::size_t k, std::size_t i) const { return terms_.at(k).at(i); }
  const std::vector<std::vector<SparseMatrix>>& terms() const noexcept { return terms_; }
  std::vector<std::size_t> dims() const;

  SparseMatrix expand() const;

  /// Applies the operator along the first order() axes of t; remaining axes
  /// are treated as independent columns.
  Tensor apply(const Tensor& t) const;

  /// Squared norm of every trailing column of t.
  std::vector<double> column_norms_sq(const Tensor& t) const;

 private:
  std::vector<std::vector<SparseMatrix>> terms_;
  std::vector<std::vector<Matrix>> dense_;
};

/// H^1_0 seminorm: Y^k_i = stiffness if i == k, mass otherwise.
KroneckerSum assemble_norm_matrix(const CartesianSpace& space);

/// Scalar field f(x, t, mu).
using Field = std::function<double(std::span<const double> x, double t, std::span<const double> mu)>;

/// Q1 element assembly with 2-point Gauss quadrature per direction. Every
/// assembled operator shares pattern(); entry/row variants visit only the
/// cells touching the requested dofs.
class Assembler {
 public:
  explicit Assembler(CartesianSpace space);

  const CartesianSpace& space() const noexcept { return space_; }
  const SparseMatrix& pattern() const noexcept { return pattern_; }

  SparseMatrix stiffness(const Field& alpha, double t, std::span<const double> mu) const;
  SparseMatrix mass() const;

  /// Forcing plus Neumann facet integrals.
  Vector load(const Field& f, const Field& h, double t, std::span<const double> mu) const;
  /// A_{free,dir} g_dir and M_{free,dir} g_dir with g interpolated at nodes.
  Vector stiffness_lifting(const Field& alpha, const Field& g, double t, std::span<const double> mu) const;
  Vector mass_lifting(const Field& g, double t, std::span<const double> mu) const;

  using Entry = std::pair<std::size_t, std::size_t>;
  std::vector<double> stiffness_entries(const Field& alpha, double t, std::span<const double> mu,
                                        std::span<const Entry> entries) const;
  std::vector<double> mass_entries(std::span<const Entry> entries) const;
  std::vector<double> load_rows(const Field& f, const Field& h, double t, std::span<const double> mu,
                                std::span<const std::size_t> rows) const;
  std::vector<double> stiffness_lifting_rows(const Field& alpha, const Field& g, double t,
                                             std::span<const double> mu, std::span<const std::size_t> rows) const;
  std::vector<double> mass_lifting_rows(const Field& g, double t, std::span<const double> mu,
                                        std::span<const std::size_t> rows) const;

  /// Nodal interpolant of g on the full grid (node_dims shape).
  Tensor interpolate(const Field& g, double t, std::span<const double> mu) const;

 private:
  struct Local;
  Local local_stiffness(std::size_t cell, const Field& alpha, double t, std::span<const double> mu) const;
  std::vector<std::size_t> cells_of_node(std::span<const std::size_t> node) const;
  std::vector<std::size_t> cell_nodes(std::size_t cell) const;  // node flat indices (full grid)
  template <class Sink>
  void load_cells(std::span<const std::size_t> cells, const Field& f, const Field& h, double t,
                  std::span<const double> mu, Sink&& sink) const;
  template <class Sink>
  void lifting_cells(std::span<const std::size_t> cells, const Field& alpha, const Field& g, double t,
                     std::span<const double> mu, Sink&& sink) const;

  CartesianSpace space_;
  std::size_t d_ = 0;
  std::size_t n_local_ = 0;
  std::vector<std::size_t> cell_dims_;
  std::vector<std::size_t> node_dims_;
  std::vector<std::size_t> node_to_free_;  // full-grid node flat -> free flat or npos
  std::vector<std::vector<std::size_t>> node_offset_;  // [local node][direction] in {0,1}
  std::vector<double> phi_;                // [q * n_local + a]
  std::vector<double> dphi_;               // [(q * n_local + a) * d + k], reference derivative
  std::vector<std::vector<double>> qpt_;   // reference coordinates in [0,1]^d
  std::vector<SparseMatrix> mass1d_full_;  // 1-D mass on all nodes
  SparseMatrix pattern_;
  std::vector<std::size_t> pattern_cols_;
};

SparseMatrix assemble_diffusion(const CartesianSpace& space, const Field& alpha, double t,
                                std::span<const double> mu);

/// Steady right-hand side: load minus the Dirichlet lifting.
Vector assemble_rhs(const CartesianSpace& space, const Field& f, const Field& g, const Field& h,
                    const Field& alpha, double t, std::span<const double> mu);

/// Bijection between tuples of 1-D nonzero indices (z_1, ..., z_d) and the
/// nonzero positions of the assembled d-D pattern.
class SparsityMap {
 public:
  SparsityMap() = default;
  SparsityMap(const CartesianSpace& space, const SparseMatrix& pattern);

  const std::vector<std::size_t>& split_dims() const noexcept { return split_dims_; }
  std::size_t size() const noexcept { return to_global_.size(); }
  std::size_t global_nnz() const noexcept { return from_split_.size(); }

  /// (row, col) of 1-D nonzero z along axis i.
  std::pair<std::size_t, std::size_t> entry_1d(std::size_t axis, std::size_t z) const;
  const SparseMatrix& pattern_1d(std::size_t axis) const { return patterns_.at(axis); }

  std::size_t global(std::size_t split_flat) const { return to_global_.at(split_flat); }
  std::size_t split(std::size_t global_pos) const { return from_split_.at(global_pos); }

  /// Global (row, col) of a split flat index and of a global position.
  std::pair<std::size_t, std::size_t> entry_of_split(std::size_t split_flat) const;
  std::pair<std::size_t, std::size_t> entry_of_global(std::size_t global_pos) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<std::size_t> split_dims_;
  std::vector<std::size_t> free_dims_;
  std::vector<SparseMatrix> patterns_;
  std::vector<std::vector<std::size_t>> cols_1d_;
  std::vector<std::size_t> to_global_;
  std::vector<std::size_t> from_split_;
  std::vector<std::size_t> rows_;
  std::vector<std::size_t> cols_;
};

SparsityMap sparsity_map(const CartesianSpace& space);

}  // namespace ttrb
