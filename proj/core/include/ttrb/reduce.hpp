#pragma once

#include "ttrb/fe.hpp"
#include "ttrb/sparse.hpp"
#include "ttrb/tensor.hpp"

#include <string>
#include <vector>

namespace ttrb {

enum class Orthogonality { Euclidean, X1, XK };

const char* to_string(Orthogonality o);

/// Chain of TT cores spanning a reduced subspace. The last right rank is the
/// subspace dimension.
struct TTBasis {
  std::vector<TTCore> cores;
  Orthogonality orthogonality = Orthogonality::Euclidean;
  double eps = 0.0;
  bool split = true;
  /// Last remainder R (dimension x trailing columns) of the sweep.
  Matrix remainder;

  std::size_t dimension() const { return cores.empty() ? 0 : cores.back().right_rank(); }
  std::vector<std::size_t> ranks() const;
  std::vector<std::size_t> axis_lengths() const;
  Matrix merged() const { return tt_merge(cores); }
};

/// Space-time POD basis: spatial (N_s x r_s) and temporal (N_t x r_t) factors.
struct STBasis {
  Matrix spatial;
  Matrix temporal;
  double eps = 0.0;
  /// ||U~||_F of the rescaled spatial unfolding and ||U^||_F of the temporal
  /// unfolding; the projection error is bounded by eps^2 times their sum of squares.
  double spatial_norm = 0.0;
  double temporal_norm = 0.0;

  std::size_t dimension() const { return static_cast<std::size_t>(spatial.cols() * temporal.cols()); }
  Matrix merged() const;
};

/// TT-SVD of a snapshot tensor whose last axis indexes parameters. Every other
/// axis is compressed; with `split` each SVD uses eps / sqrt(#compressed axes).
TTBasis tt_svd(const Tensor& snapshots, double eps, bool split = true);

/// TT-SVD whose first norms.size() cores are orthonormal in the product norm
/// kron_i norms[i]; remaining axes are treated as in tt_svd.
TTBasis x1_tt_svd(const Tensor& snapshots, const std::vector<SparseMatrix>& norms, double eps, bool split = true);

/// TT-SVD whose spatial cores are orthonormal in the Kronecker-sum norm x.
TTBasis xk_tt_svd(const Tensor& snapshots, const KroneckerSum& x, double eps, bool split = true);

/// Space-time POD with a spatial norm x (identity when empty). The snapshot
/// tensor has shape (N_s..., N_t, N_mu) or (N_s..., N_mu) with spatial_axes
/// leading spatial axes.
STBasis tpod(const Tensor& snapshots, std::size_t spatial_axes, const SparseMatrix& x, double eps);
STBasis tpod(const Tensor& snapshots, std::size_t spatial_axes, double eps);

/// One step of the weight recursion of xk_tt_svd:
/// W'[a, b] = sum W[a', b'] core[a', :, a]^T y core[b', :, b].
Matrix weight_update(const Matrix& w, const TTCore& core, const Matrix& y);

/// Index of the Kronecker-sum term used for the rank-1 surrogate norm.
std::size_t surrogate_term(const KroneckerSum& x);
/// Rank-1 surrogate factors for term q.
std::vector<SparseMatrix> surrogate_norm(const KroneckerSum& x, std::size_t q);

std::size_t subspace_dimension(const TTBasis& b);
std::size_t subspace_dimension(const STBasis& b);
double reduction_factor(std::size_t full_dimension, std::size_t reduced_dimension);

}  // namespace ttrb
