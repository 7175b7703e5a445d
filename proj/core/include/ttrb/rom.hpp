#pragma once

#include "ttrb/fom.hpp"
#include "ttrb/hyper.hpp"
#include "ttrb/reduce.hpp"

#include <string>
#include <vector>

namespace ttrb {

enum class Method { TT, ST };

const char* to_string(Method m);
Method parse_method(const std::string& s);

/// Galerkin ROM with hyper-reduced operators. For transient problems the
/// reduced space-time operator is
///   sum_q c_q (D_q + (1 - theta) / theta * S_q) - M_sub / (theta dt)
/// where D_q couples equal time steps, S_q pairs step n with step n - 1 of the
/// Jacobian term, and M_sub is the projected mass coupling between consecutive steps.
struct ReducedModel {
  Method method = Method::TT;
  TTBasis tt;
  STBasis st;
  AffineDecomposition jac;
  AffineDecomposition res;
  std::vector<JacobianEntry> jac_entries;
  std::vector<ResidualEntry> res_entries;

  Tensor jac_diag;  ///< (n, n_K, n)
  Tensor jac_sub;   ///< (n, n_K, n); transient only
  Matrix mass_sub;  ///< (n, n); transient only
  Matrix res_proj;  ///< (n, n_L)

  std::vector<std::size_t> state_dims;
  bool transient = false;
  double theta = 1.0;
  double dt = 1.0;
  double eps = 0.0;
  double res_snapshot_norm = 0.0;
  double jac_snapshot_norm = 0.0;

  double basis_seconds = 0.0;
  double hyper_seconds = 0.0;
  double projection_seconds = 0.0;

  std::size_t dimension() const;
  Tensor reconstruct(const Vector& coeffs) const;
  Matrix basis_matrix() const;
};

struct RomOptions {
  double eps = 1e-4;
  bool split = true;
};

/// Offline phase on precomputed snapshots. Hyper-reduction uses the first
/// snapshots.n_hyper parameters.
ReducedModel build_tt_rom(const FullOrderModel& fom, const SnapshotSet& snapshots, const RomOptions& opt);
ReducedModel build_st_rom(const FullOrderModel& fom, const SnapshotSet& snapshots, const RomOptions& opt);
ReducedModel build_rom(Method m, const FullOrderModel& fom, const SnapshotSet& snapshots, const RomOptions& opt);

/// Decodes interpolation indices of a Jacobian/residual decomposition into FOM entries.
std::vector<JacobianEntry> jacobian_sample_entries(const AffineDecomposition& a, const FullOrderModel& fom);
std::vector<ResidualEntry> residual_sample_entries(const AffineDecomposition& a, const FullOrderModel& fom);

struct OnlineResult {
  Vector coeffs;
  Vector jac_coeffs;
  Vector res_coeffs;
  Tensor state;  ///< state_dims, free dofs only
};

Matrix reduced_operator(const ReducedModel& rom, const Vector& jac_coeffs);
Vector reduced_rhs(const ReducedModel& rom, const Vector& res_coeffs);
OnlineResult online_solve(const ReducedModel& rom, const FullOrderModel& fom, std::span<const double> mu);

// Core-wise Galerkin projections. `shifted` pairs test step n with trial and
// operator step n - 1 on the temporal core.
Tensor project_jacobian_tt(const TTBasis& basis, const TTBasis& op, const SparsityMap& map, std::size_t spatial_axes,
                           bool shifted);
Matrix project_residual_tt(const TTBasis& basis, const TTBasis& rhs);
/// sum_n Phi_n^T M Phi_{n-1} for M = kron_i mass_i.
Matrix project_mass_shift_tt(const TTBasis& basis, const std::vector<SparseMatrix>& mass, const SparsityMap& map);

Tensor project_jacobian_st(const STBasis& basis, const STBasis& op, const SparseMatrix& pattern, bool shifted);
Matrix project_residual_st(const STBasis& basis, const STBasis& rhs);
Matrix project_mass_shift_st(const STBasis& basis, const SparseMatrix& mass);

/// Mean over parameters of ||U_rom - U_fom||_X / ||U_fom||_X. Time steps use
/// the block-diagonal extension of X (the dt factor cancels).
double error_metric(const std::vector<Tensor>& fom, const std::vector<Tensor>& rom, const KroneckerSum& x);
double relative_error(const Tensor& fom, const Tensor& rom, const KroneckerSum& x);

struct StabilityConstants {
  double sigma_min = 0.0;  ///< inf-sup constant of X^{-1/2} K X^{-1/2}
  double sigma_max = 0.0;  ///< its spectral norm
};
StabilityConstants stability_constants(const Matrix& k, const Matrix& x);

struct AposterioriEstimate {
  StabilityConstants stability;
  double residual_term = 0.0;  ///< ||L^ - K^ U^||_{X^-1}
  double rhs_term = 0.0;       ///< interpolation bound for the residual
  double jacobian_term = 0.0;  ///< interpolation bound for the Jacobian
  double bound = 0.0;
  double error = 0.0;          ///< ||U - U^||_X
};

/// Dense error estimate; intended for small problems only.
AposterioriEstimate aposteriori_estimate(const ReducedModel& rom, const FullOrderModel& fom,
                                         std::span<const double> mu, const Tensor& fom_state);

void save_model(const std::string& dir, const ReducedModel& rom);
ReducedModel load_model(const std::string& dir);

}  // namespace ttrb
