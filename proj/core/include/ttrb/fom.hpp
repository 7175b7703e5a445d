#pragma once

#include "ttrb/fe.hpp"
#include "ttrb/sparse.hpp"
#include "ttrb/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ttrb {

struct ParameterBox {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t size() const noexcept { return lo.size(); }
  bool contains(std::span<const double> mu) const;
};

using Parameter = std::vector<double>;

/// Halton point with 1-based `index` (radical inverse in the first p primes),
/// mapped into the box. Index 1 in base 2 gives 1/2.
Parameter halton(std::size_t index, const ParameterBox& box);
/// Points index = start, ..., start + n - 1.
std::vector<Parameter> halton_points(std::size_t n, const ParameterBox& box, std::size_t start = 1);
double radical_inverse(std::size_t index, std::size_t base);

/// Seeded uniform samples in the box.
std::vector<Parameter> uniform_points(std::size_t n, const ParameterBox& box, std::uint64_t seed);

struct ProblemSpec {
  std::string name;
  CartesianSpace space;
  ParameterBox box;
  Field alpha;
  Field f;
  Field g;
  Field h;
  Field u0;
  bool alpha_time_dependent = false;
  double final_time = 0.0;
  std::size_t n_steps = 0;  ///< 0 means steady
  double theta = 1.0;

  bool transient() const noexcept { return n_steps > 0; }
  double dt() const noexcept { return transient() ? final_time / static_cast<double>(n_steps) : 1.0; }
};

/// Sampled Jacobian entry: free row, free column, step.
struct JacobianEntry {
  std::size_t row;
  std::size_t col;
  std::size_t step;
};

/// Sampled residual entry: free row, step.
struct ResidualEntry {
  std::size_t row;
  std::size_t step;
};

/// Q1 diffusion problem solved with a theta-scheme. Step s (0-based) advances
/// to t_{s+1}. Every quantity lives on free dofs; the Dirichlet lifting enters
/// the residual and is re-added by full_field().
class FullOrderModel {
 public:
  explicit FullOrderModel(ProblemSpec spec);

  const ProblemSpec& spec() const noexcept { return spec_; }
  const Assembler& assembler() const noexcept { return asm_; }
  const SparsityMap& sparsity() const noexcept { return map_; }
  const KroneckerSum& norm() const noexcept { return norm_; }

  std::size_t n_time() const noexcept { return spec_.transient() ? spec_.n_steps : 1; }
  /// (N_1, ..., N_d) plus N_t when transient.
  std::vector<std::size_t> state_dims() const;
  double time(std::size_t step) const noexcept { return spec_.transient() ? spec_.dt() * static_cast<double>(step + 1) : 0.0; }

  struct Result {
    Tensor solution;                        ///< state_dims()
    Tensor residual;                        ///< state_dims(), if requested
    std::vector<std::vector<double>> jacobian;  ///< nonzeros per step, if requested
  };
  Result solve(std::span<const double> mu, bool with_residual = false, bool with_jacobian = false) const;

  SparseMatrix stiffness(std::span<const double> mu, double t) const;
  /// Step operator dt^-1 M + theta A(t_{s+1}); A for steady problems.
  SparseMatrix jacobian(std::span<const double> mu, std::size_t step) const;
  /// Right-hand side of block `step` of the space-time system.
  Vector residual(std::span<const double> mu, std::size_t step) const;

  std::vector<double> jacobian_entries(std::span<const double> mu, std::span<const JacobianEntry> e) const;
  std::vector<double> residual_entries(std::span<const double> mu, std::span<const ResidualEntry> e) const;

  /// Block lower-bidiagonal space-time operator (tests and small problems).
  SparseMatrix space_time_operator(std::span<const double> mu) const;

  /// Free-dof state plus the Dirichlet values on the full node grid.
  Tensor full_field(const Tensor& state, std::span<const double> mu) const;

 private:
  Vector ell(std::span<const double> mu, double t) const;
  Vector initial_free(std::span<const double> mu) const;

  ProblemSpec spec_;
  Assembler asm_;
  SparsityMap map_;
  KroneckerSum norm_;
  SparseMatrix mass_;
};

struct SnapshotSet {
  std::vector<Parameter> params;
  Tensor solutions;   ///< (state dims..., n_params)
  Tensor residuals;   ///< (state dims..., n_hyper)
  Tensor jacobians;   ///< (N_z global, N_t, n_hyper) nonzeros in pattern order
  std::size_t n_hyper = 0;
};

/// Solves the FOM for every parameter, in parallel across parameters.
/// Residual and Jacobian snapshots are stored for the first n_hyper parameters.
SnapshotSet generate_snapshots(const FullOrderModel& fom, const std::vector<Parameter>& params, std::size_t n_hyper,
                               unsigned threads = 0);

void save_snapshots(const std::string& dir, const SnapshotSet& s);
SnapshotSet load_snapshots(const std::string& dir);

}  // namespace ttrb
