#pragma once

#include "ttrb/tensor.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ttrb {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse column matrix with sorted row indices. Explicit zeros
/// are kept, so the stored pattern is structural.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols);

  /// Duplicate entries are summed.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);
  static SparseMatrix from_dense(const Matrix& m, double drop_tol = 0.0);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  const std::vector<std::size_t>& col_ptr() const noexcept { return col_ptr_; }
  const std::vector<std::size_t>& row_indices() const noexcept { return row_idx_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  /// Position of (i, j) in the value array, if stored.
  std::optional<std::size_t> find(std::size_t i, std::size_t j) const;
  double coeff(std::size_t i, std::size_t j) const;

  /// Column of every stored entry, aligned with values().
  std::vector<std::size_t> col_indices() const;

  Vector operator*(const Vector& x) const;
  Matrix operator*(const Matrix& x) const;
  Matrix to_dense() const;
  SparseMatrix transpose() const;
  bool same_pattern(const SparseMatrix& other) const;

  /// max |i - j| over stored entries.
  std::size_t bandwidth() const;

  /// Copy of this matrix with values replaced; the pattern is shared.
  SparseMatrix with_values(std::vector<double> values) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<std::size_t> row_idx_;
  std::vector<double> values_;
};

/// a + s * b, patterns merged.
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double s = 1.0);

class NotSpdError : public std::runtime_error {
 public:
  explicit NotSpdError(std::size_t pivot);
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Upper triangular banded factor H with H^T H = X.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;
  CholeskyFactor(std::size_t n, std::size_t bandwidth, std::vector<double> band);

  std::size_t size() const noexcept { return n_; }
  std::size_t bandwidth() const noexcept { return bw_; }
  SparseMatrix upper() const;
  Matrix dense() const;

  /// Entry H(i, j) for i <= j <= i + bandwidth.
  double operator()(std::size_t i, std::size_t j) const { return band_[j * (bw_ + 1) + (bw_ + i - j)]; }

  /// H * x.
  Matrix apply(const Matrix& x) const;

  /// Solves X y = b.
  Matrix solve(const Matrix& b) const;

 private:
  std::size_t n_ = 0;
  std::size_t bw_ = 0;
  // Column j holds H(j - bw .. j, j); out-of-range slots are zero.
  std::vector<double> band_;
};

/// Banded up-looking Cholesky without reordering. Throws NotSpdError carrying
/// the first non-positive pivot.
CholeskyFactor cholesky(const SparseMatrix& x);

enum class Transpose { No, Yes };

/// Solves H y = b (Transpose::No) or H^T y = b (Transpose::Yes).
Matrix tri_solve(const CholeskyFactor& h, const Matrix& b, Transpose flag);

struct TruncatedSvd {
  Matrix left;       ///< m x r, orthonormal columns
  Matrix remainder;  ///< r x n, Sigma V^T
  Vector singular_values;  ///< all singular values, descending
  std::size_t rank = 0;
};

/// Smallest rank r with sum_{i>r} sigma_i^2 <= eps^2 ||a||_F^2 (at least 1).
/// The largest-magnitude entry of each kept left vector is made positive.
TruncatedSvd truncated_svd(const Matrix& a, double eps);

/// Rank rule used by truncated_svd, exposed for tests.
std::size_t truncation_rank(const Vector& singular_values, double eps);

SparseMatrix kron_sparse(const SparseMatrix& a, const SparseMatrix& b);

/// Largest eigenvalue magnitude estimated by power iteration.
double spectral_radius(const SparseMatrix& a, int max_iter = 50, double tol = 1e-8);

}  // namespace ttrb
