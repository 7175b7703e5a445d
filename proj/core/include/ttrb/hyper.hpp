#pragma once

#include "ttrb/fe.hpp"
#include "ttrb/reduce.hpp"
#include "ttrb/tensor.hpp"

#include <Eigen/LU>

#include <span>
#include <vector>

namespace ttrb {

/// Greedy EIM point selection over the columns of phi. The first point is
/// argmax |phi(:,0)|, later ones maximise the interpolation residual; ties go
/// to the smallest row.
std::vector<std::size_t> eim_loop(const Matrix& phi);

/// Hyper-reduced approximation q(mu) ~ Phi c(mu) with c from interpolation at
/// sampled entries. Quantity dims exclude the parameter axis.
struct AffineDecomposition {
  enum class Kind { TT, ST };

  Kind kind = Kind::TT;
  TTBasis tt;
  STBasis st;
  std::vector<std::size_t> quantity_dims;
  /// TT: one index vector per compressed axis. ST: {spatial, temporal}.
  std::vector<std::vector<std::size_t>> axis_indices;
  /// Flat indices of the sampled entries in the quantity.
  std::vector<std::size_t> flat;
  /// P^T Phi, rows ordered like `flat`.
  Matrix interp;
  Eigen::PartialPivLU<Matrix> lu;
  /// ||(P^T Phi)^{-1}||_F
  double chi = 0.0;

  std::size_t n_terms() const { return static_cast<std::size_t>(interp.cols()); }
  Vector coefficients(std::span<const double> samples) const;
  Matrix basis_matrix() const;
  Tensor reconstruct(const Vector& coeffs) const;
  /// Recomputes lu and chi from interp.
  void factorize();
};

/// TT-SVD (Euclidean) hyper-basis with core-wise EIM sweeps.
AffineDecomposition tt_mdeim(const Tensor& snapshots, double eps, bool split = true);

/// TPOD (identity norm) hyper-basis with EIM on the spatial and temporal factors.
AffineDecomposition st_mdeim(const Tensor& snapshots, std::size_t spatial_axes, double eps);

/// (N_z, [N_t,] N_mu) nonzero snapshots -> (N_z1, ..., N_zd, [N_t,] N_mu).
Tensor jacobian_snapshots_to_split_axes(const Tensor& nonzeros, const SparsityMap& map);

Vector online_coefficients(const AffineDecomposition& a, std::span<const double> samples);

}  // namespace ttrb
