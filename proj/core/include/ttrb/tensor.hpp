#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ttrb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raised when tensor shapes do not line up for an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense k-way array stored first-axis-major: the last axis varies fastest,
/// so the flat offset of (i_1, ..., i_k) is ((i_1 N_2 + i_2) N_3 + ...) + i_k.
/// All indices in this library are 0-based.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims);
  Tensor(std::vector<std::size_t> dims, std::vector<double> data);

  /// Copies a matrix into an order-2 tensor (rows, cols).
  static Tensor from_matrix(const Matrix& m);

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t order() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  std::size_t offset(std::span<const std::size_t> index) const;
  std::size_t offset(std::initializer_list<std::size_t> index) const {
    return offset(std::span<const std::size_t>(index.begin(), index.size()));
  }
  double& at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
  double at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

  /// Same data with new dimensions; the element count must match.
  Tensor reshaped(std::vector<std::size_t> dims) const&;
  Tensor reshaped(std::vector<std::size_t> dims) &&;

  /// Matrix view obtained by merging the first `row_axes` axes into rows and
  /// the remaining axes into columns.
  Matrix unfold(std::size_t row_axes) const;

  double norm() const;

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> data_;
};

std::size_t product(std::span<const std::size_t> dims);

/// Builds a tensor of the given shape from a matrix whose row-major layout
/// matches the first-axis-major layout of the result.
Tensor fold(const Matrix& m, std::vector<std::size_t> dims);

/// Axis permutation: axis k of the result is axis perm[k] of the input.
Tensor permute_axes(const Tensor& t, std::span<const std::size_t> perm);

/// Merges runs of consecutive axes. `groups` lists the axes of every output
/// axis; together they must enumerate 0..order-1 in increasing order.
Tensor merge_axes(const Tensor& t, const std::vector<std::vector<std::size_t>>& groups);

/// Splits one axis into several; the product of `dims` must equal its length.
Tensor split_axis(const Tensor& t, std::size_t axis, std::span<const std::size_t> dims);

/// T[a..., b...] = sum_c R[a..., c] S[c, b...].
Tensor contract(const Tensor& r, const Tensor& s);

/// General single-axis contraction. Result axes are the remaining axes of r
/// followed by the remaining axes of s.
Tensor contract(const Tensor& r, std::size_t axis_r, const Tensor& s, std::size_t axis_s);

/// Mode-k product: axis k of t (length m.cols()) is replaced by an axis of
/// length m.rows(), staying in position k.
Tensor mode_contract(const Matrix& m, const Tensor& t, std::size_t mode);

/// Bijection between index pairs and merged indices, first index slowest.
struct KronMap {
  std::size_t n_left = 0;
  std::size_t n_right = 0;

  std::size_t size() const noexcept { return n_left * n_right; }
  std::size_t operator()(std::size_t i_left, std::size_t i_right) const;
  std::pair<std::size_t, std::size_t> inverse(std::size_t merged) const;
};

/// Merged index of a multi-index over the given dims.
std::size_t kron_index(std::span<const std::size_t> dims, std::span<const std::size_t> index);
std::vector<std::size_t> kron_index_inv(std::span<const std::size_t> dims, std::size_t merged);

/// Order-3 (r_prev, N, r_next) or order-4 (r_prev, N, N, r_next) TT core.
class TTCore {
 public:
  TTCore() = default;
  explicit TTCore(Tensor t);

  std::size_t left_rank() const noexcept { return t_.dim(0); }
  std::size_t right_rank() const noexcept { return t_.dims().back(); }
  std::size_t axis_len() const noexcept { return t_.dim(1); }
  bool is_operator() const noexcept { return t_.order() == 4; }

  const Tensor& tensor() const noexcept { return t_; }
  Tensor& tensor() noexcept { return t_; }

  double operator()(std::size_t a, std::size_t i, std::size_t b) const {
    return t_[(a * t_.dim(1) + i) * t_.dim(2) + b];
  }

 private:
  Tensor t_;
};

/// Checks that consecutive ranks agree and the chain starts at rank 1.
void validate_chain(std::span<const TTCore> cores);

/// Contracts a core chain into a tensor of shape (N_1, ..., N_k, r_k). If
/// `coeffs` is given it is contracted with the last rank, dropping that axis.
Tensor tt_reconstruct(std::span<const TTCore> cores, const Vector* coeffs = nullptr);

/// Merged basis matrix (N_1 ... N_k) x r_k.
Matrix tt_merge(std::span<const TTCore> cores);

}  // namespace ttrb
