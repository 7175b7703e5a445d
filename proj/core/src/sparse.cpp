#include "ttrb/sparse.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace ttrb {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), col_ptr_(cols + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) {
  for (const auto& e : entries)
    if (e.row >= rows || e.col >= cols) throw std::out_of_range("triplet outside matrix");
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) { return a.col != b.col ? a.col < b.col : a.row < b.row; });
  SparseMatrix m(rows, cols);
  m.row_idx_.reserve(entries.size());
  m.values_.reserve(entries.size());
  std::size_t k = 0;
  for (std::size_t j = 0; j < cols; ++j) {
    while (k < entries.size() && entries[k].col == j) {
      const std::size_t i = entries[k].row;
      double v = 0.0;
      while (k < entries.size() && entries[k].col == j && entries[k].row == i) v += entries[k++].value;
      m.row_idx_.push_back(i);
      m.values_.push_back(v);
    }
    m.col_ptr_[j + 1] = m.values_.size();
  }
  return m;
}

SparseMatrix SparseMatrix::from_dense(const Matrix& d, double drop_tol) {
  std::vector<Triplet> t;
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    for (Eigen::Index i = 0; i < d.rows(); ++i)
      if (std::abs(d(i, j)) > drop_tol)
        t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), d(i, j)});
  return from_triplets(static_cast<std::size_t>(d.rows()), static_cast<std::size_t>(d.cols()), std::move(t));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

std::optional<std::size_t> SparseMatrix::find(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) return std::nullopt;
  const auto b = row_idx_.begin() + static_cast<long>(col_ptr_[j]);
  const auto e = row_idx_.begin() + static_cast<long>(col_ptr_[j + 1]);
  const auto it = std::lower_bound(b, e, i);
  if (it == e || *it != i) return std::nullopt;
  return static_cast<std::size_t>(it - row_idx_.begin());
}

double SparseMatrix::coeff(std::size_t i, std::size_t j) const {
  const auto p = find(i, j);
  return p ? values_[*p] : 0.0;
}

std::vector<std::size_t> SparseMatrix::col_indices() const {
  std::vector<std::size_t> c(nnz());
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) c[p] = j;
  return c;
}

Vector SparseMatrix::operator*(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != cols_) throw ShapeError("sparse matvec size mismatch");
  Vector y = Vector::Zero(static_cast<Eigen::Index>(rows_));
  for (std::size_t j = 0; j < cols_; ++j) {
    const double xj = x[static_cast<Eigen::Index>(j)];
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) y[static_cast<Eigen::Index>(row_idx_[p])] += values_[p] * xj;
  }
  return y;
}

Matrix SparseMatrix::operator*(const Matrix& x) const {
  if (static_cast<std::size_t>(x.rows()) != cols_) throw ShapeError("sparse matmul size mismatch");
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(rows_), x.cols());
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p)
      y.row(static_cast<Eigen::Index>(row_idx_[p])) += values_[p] * x.row(static_cast<Eigen::Index>(j));
  return y;
}

Matrix SparseMatrix::to_dense() const {
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p)
      d(static_cast<Eigen::Index>(row_idx_[p]), static_cast<Eigen::Index>(j)) += values_[p];
  return d;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) t.push_back({j, row_idx_[p], values_[p]});
  return from_triplets(cols_, rows_, std::move(t));
}

bool SparseMatrix::same_pattern(const SparseMatrix& o) const {
  return rows_ == o.rows_ && cols_ == o.cols_ && col_ptr_ == o.col_ptr_ && row_idx_ == o.row_idx_;
}

std::size_t SparseMatrix::bandwidth() const {
  std::size_t bw = 0;
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
      const std::size_t i = row_idx_[p];
      bw = std::max(bw, i > j ? i - j : j - i);
    }
  return bw;
}

SparseMatrix SparseMatrix::with_values(std::vector<double> values) const {
  if (values.size() != nnz()) throw ShapeError("with_values: length mismatch");
  SparseMatrix m = *this;
  m.values_ = std::move(values);
  return m;
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double s) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("sparse add size mismatch");
  if (a.same_pattern(b)) {
    std::vector<double> v = a.values();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += s * b.values()[k];
    return a.with_values(std::move(v));
  }
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  const auto ca = a.col_indices();
  const auto cb = b.col_indices();
  for (std::size_t k = 0; k < a.nnz(); ++k) t.push_back({a.row_indices()[k], ca[k], a.values()[k]});
  for (std::size_t k = 0; k < b.nnz(); ++k) t.push_back({b.row_indices()[k], cb[k], s * b.values()[k]});
  return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
}

NotSpdError::NotSpdError(std::size_t pivot)
    : std::runtime_error("matrix not SPD (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}

CholeskyFactor::CholeskyFactor(std::size_t n, std::size_t bandwidth, std::vector<double> band)
    : n_(n), bw_(bandwidth), band_(std::move(band)) {
  if (band_.size() != n_ * (bw_ + 1)) throw ShapeError("band storage size mismatch");
}

SparseMatrix CholeskyFactor::upper() const {
  std::vector<Triplet> t;
  for (std::size_t j = 0; j < n_; ++j)
    for (std::size_t i = j > bw_ ? j - bw_ : 0; i <= j; ++i) t.push_back({i, j, (*this)(i, j)});
  return SparseMatrix::from_triplets(n_, n_, std::move(t));
}

Matrix CholeskyFactor::dense() const { return upper().to_dense(); }

Matrix CholeskyFactor::apply(const Matrix& x) const {
  if (static_cast<std::size_t>(x.rows()) != n_) throw ShapeError("cholesky apply size mismatch");
  Matrix y = Matrix::Zero(x.rows(), x.cols());
  for (std::size_t j = 0; j < n_; ++j)
    for (std::size_t i = j > bw_ ? j - bw_ : 0; i <= j; ++i)
      y.row(static_cast<Eigen::Index>(i)) += (*this)(i, j) * x.row(static_cast<Eigen::Index>(j));
  return y;
}

Matrix CholeskyFactor::solve(const Matrix& b) const {
  return tri_solve(*this, tri_solve(*this, b, Transpose::Yes), Transpose::No);
}

CholeskyFactor cholesky(const SparseMatrix& x) {
  if (x.rows() != x.cols()) throw ShapeError("cholesky needs a square matrix");
  const std::size_t n = x.rows();
  const std::size_t bw = x.bandwidth();
  const std::size_t w = bw + 1;
  std::vector<double> band(n * w, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t p = x.col_ptr()[j]; p < x.col_ptr()[j + 1]; ++p) {
      const std::size_t i = x.row_indices()[p];
      if (i <= j) band[j * w + (bw + i - j)] += x.values()[p];
    }

  auto at = [&](std::size_t i, std::size_t j) -> double& { return band[j * w + (bw + i - j)]; };
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k0 = j > bw ? j - bw : 0;
    for (std::size_t i = k0; i < j; ++i) {
      double s = at(i, j);
      const std::size_t kk = std::max(k0, i > bw ? i - bw : 0);
      for (std::size_t k = kk; k < i; ++k) s -= at(k, i) * at(k, j);
      at(i, j) = s / at(i, i);
    }
    double d = at(j, j);
    for (std::size_t k = k0; k < j; ++k) d -= at(k, j) * at(k, j);
    if (!(d > 0.0) || !std::isfinite(d)) throw NotSpdError(j);
    at(j, j) = std::sqrt(d);
  }
  return CholeskyFactor(n, bw, std::move(band));
}

Matrix tri_solve(const CholeskyFactor& h, const Matrix& b, Transpose flag) {
  const std::size_t n = h.size();
  const std::size_t bw = h.bandwidth();
  if (static_cast<std::size_t>(b.rows()) != n) throw ShapeError("tri_solve size mismatch");
  Matrix y = b;
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    double* v = y.col(c).data();
    if (flag == Transpose::No) {
      for (std::size_t j = n; j-- > 0;) {
        v[j] /= h(j, j);
        const double vj = v[j];
        for (std::size_t i = j > bw ? j - bw : 0; i < j; ++i) v[i] -= h(i, j) * vj;
      }
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        double s = v[j];
        for (std::size_t i = j > bw ? j - bw : 0; i < j; ++i) s -= h(i, j) * v[i];
        v[j] = s / h(j, j);
      }
    }
  }
  return y;
}

std::size_t truncation_rank(const Vector& sv, double eps) {
  const auto n = static_cast<std::size_t>(sv.size());
  if (n == 0) return 0;
  const double total = sv.squaredNorm();
  const double budget = eps * eps * total;
  double tail = 0.0;
  std::size_t r = n;
  // Drop trailing values while the accumulated tail stays within budget.
  while (r > 1) {
    const double s = sv[static_cast<Eigen::Index>(r - 1)];
    if (tail + s * s > budget) break;
    tail += s * s;
    --r;
  }
  return r;
}

TruncatedSvd truncated_svd(const Matrix& a, double eps) {
  if (eps < 0.0) throw std::invalid_argument("truncated_svd: negative tolerance");
  if (a.rows() == 0 || a.cols() == 0) throw ShapeError("truncated_svd: empty matrix");
  TruncatedSvd out;
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.singular_values = svd.singularValues();
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  const std::size_t r = truncation_rank(out.singular_values, eps);
  out.rank = r;
  const auto ri = static_cast<Eigen::Index>(r);
  out.left = u.leftCols(ri);
  out.remainder = out.singular_values.head(ri).asDiagonal() * v.leftCols(ri).transpose();
  for (Eigen::Index j = 0; j < ri; ++j) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < out.left.rows(); ++i) {
      const double m = std::abs(out.left(i, j));
      if (m > best * (1.0 + 1e-12) + 1e-300) {
        best = m;
        imax = i;
      }
    }
    if (out.left(imax, j) < 0.0) {
      out.left.col(j) *= -1.0;
      out.remainder.row(j) *= -1.0;
    }
  }
  return out;
}

SparseMatrix kron_sparse(const SparseMatrix& a, const SparseMatrix& b) {
  constexpr auto cap = static_cast<std::size_t>(std::numeric_limits<std::ptrdiff_t>::max());
  auto overflows = [&](std::size_t x, std::size_t y) { return x != 0 && y > cap / x; };
  if (overflows(a.rows(), b.rows()) || overflows(a.cols(), b.cols()) || overflows(a.nnz(), b.nnz()))
    throw CapacityError("kron_sparse: result exceeds index capacity");
  const auto ac = a.col_indices();
  const auto bc = b.col_indices();
  std::vector<Triplet> t;
  t.reserve(a.nnz() * b.nnz());
  for (std::size_t p = 0; p < a.nnz(); ++p)
    for (std::size_t q = 0; q < b.nnz(); ++q)
      t.push_back({a.row_indices()[p] * b.rows() + b.row_indices()[q], ac[p] * b.cols() + bc[q],
                   a.values()[p] * b.values()[q]});
  return SparseMatrix::from_triplets(a.rows() * b.rows(), a.cols() * b.cols(), std::move(t));
}

double spectral_radius(const SparseMatrix& a, int max_iter, double tol) {
  if (a.rows() != a.cols()) throw ShapeError("spectral_radius needs a square matrix");
  const auto n = static_cast<Eigen::Index>(a.rows());
  if (n == 0) return 0.0;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = dist(rng);
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector y = a * x;
    const double next = y.norm();
    if (next == 0.0) return 0.0;
    x = y / next;
    if (std::abs(next - lambda) <= tol * next) return next;
    lambda = next;
  }
  return lambda;
}

}  // namespace ttrb
