#include "ttrb/tensor.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace ttrb {

namespace {

std::string dims_str(std::span<const std::size_t> dims) {
  std::string s = "(";
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k) s += ",";
    s += std::to_string(dims[k]);
  }
  return s + ")";
}

}  // namespace

std::size_t product(std::span<const std::size_t> dims) {
  std::size_t p = 1;
  for (auto d : dims) p *= d;
  return p;
}

Tensor::Tensor(std::vector<std::size_t> dims) : dims_(std::move(dims)), data_(product(dims_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (product(dims_) != data_.size())
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match dims " +
                     dims_str(dims_));
}

Tensor Tensor::from_matrix(const Matrix& m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  Eigen::Map<RowMatrix>(t.data_.data(), m.rows(), m.cols()) = m;
  return t;
}

std::size_t Tensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size()) throw ShapeError("index order mismatch");
  std::size_t off = 0;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (index[k] >= dims_[k]) throw std::out_of_range("tensor index out of range");
    off = off * dims_[k] + index[k];
  }
  return off;
}

Tensor Tensor::reshaped(std::vector<std::size_t> dims) const& {
  Tensor copy = *this;
  return std::move(copy).reshaped(std::move(dims));
}

Tensor Tensor::reshaped(std::vector<std::size_t> dims) && {
  if (product(dims) != data_.size())
    throw ShapeError("cannot reshape " + dims_str(dims_) + " to " + dims_str(dims));
  dims_ = std::move(dims);
  return std::move(*this);
}

Matrix Tensor::unfold(std::size_t row_axes) const {
  if (row_axes > dims_.size()) throw ShapeError("unfold: too many row axes");
  const std::size_t rows = product(std::span(dims_).first(row_axes));
  const std::size_t cols = rows == 0 ? 0 : data_.size() / rows;
  return Eigen::Map<const RowMatrix>(data_.data(), static_cast<Eigen::Index>(rows),
                                     static_cast<Eigen::Index>(cols));
}

double Tensor::norm() const {
  return Eigen::Map<const Vector>(data_.data(), static_cast<Eigen::Index>(data_.size())).norm();
}

Tensor fold(const Matrix& m, std::vector<std::size_t> dims) {
  if (product(dims) != static_cast<std::size_t>(m.size()))
    throw ShapeError("fold: size mismatch for dims " + dims_str(dims));
  Tensor t(std::move(dims));
  Eigen::Map<RowMatrix>(t.storage().data(), m.rows(), m.cols()) = m;
  return t;
}

Tensor permute_axes(const Tensor& t, std::span<const std::size_t> perm) {
  const std::size_t k = t.order();
  if (perm.size() != k) throw ShapeError("permute_axes: permutation length mismatch");
  std::vector<bool> seen(k, false);
  for (auto p : perm) {
    if (p >= k || seen[p]) throw ShapeError("permute_axes: not a permutation");
    seen[p] = true;
  }
  std::vector<std::size_t> out_dims(k);
  for (std::size_t a = 0; a < k; ++a) out_dims[a] = t.dim(perm[a]);

  // Stride in the input of each output axis.
  std::vector<std::size_t> in_stride(k, 1);
  for (std::size_t a = k; a-- > 1;) in_stride[a - 1] = in_stride[a] * t.dim(a);
  std::vector<std::size_t> stride(k);
  for (std::size_t a = 0; a < k; ++a) stride[a] = in_stride[perm[a]];

  Tensor out(out_dims);
  if (out.size() == 0) return out;
  std::vector<std::size_t> idx(k, 0);
  std::size_t src = 0;
  auto in = t.data();
  auto dst = out.data();
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    dst[flat] = in[src];
    for (std::size_t a = k; a-- > 0;) {
      if (++idx[a] < out_dims[a]) {
        src += stride[a];
        break;
      }
      src -= stride[a] * (out_dims[a] - 1);
      idx[a] = 0;
    }
  }
  return out;
}

Tensor merge_axes(const Tensor& t, const std::vector<std::vector<std::size_t>>& groups) {
  std::vector<std::size_t> dims;
  std::size_t next = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw ShapeError("merge_axes: empty group");
    std::size_t len = 1;
    for (auto a : g) {
      if (a != next) throw ShapeError("merge_axes: groups must be contiguous and ordered");
      len *= t.dim(a);
      ++next;
    }
    dims.push_back(len);
  }
  if (next != t.order()) throw ShapeError("merge_axes: groups do not cover all axes");
  return t.reshaped(std::move(dims));
}

Tensor split_axis(const Tensor& t, std::size_t axis, std::span<const std::size_t> dims) {
  if (axis >= t.order()) throw ShapeError("split_axis: axis out of range");
  if (product(dims) != t.dim(axis)) throw ShapeError("split_axis: lengths do not multiply to axis length");
  std::vector<std::size_t> out(t.dims().begin(), t.dims().begin() + static_cast<long>(axis));
  out.insert(out.end(), dims.begin(), dims.end());
  out.insert(out.end(), t.dims().begin() + static_cast<long>(axis) + 1, t.dims().end());
  return t.reshaped(std::move(out));
}

Tensor contract(const Tensor& r, const Tensor& s) {
  if (r.order() == 0 || s.order() == 0) throw ShapeError("contract: empty operand");
  const std::size_t c = r.dims().back();
  if (s.dim(0) != c)
    throw ShapeError("contract: shared axis mismatch " + dims_str(r.dims()) + " x " + dims_str(s.dims()));
  std::vector<std::size_t> dims(r.dims().begin(), r.dims().end() - 1);
  dims.insert(dims.end(), s.dims().begin() + 1, s.dims().end());
  const Matrix prod = r.unfold(r.order() - 1) * s.unfold(1);
  return fold(prod, std::move(dims));
}

Tensor contract(const Tensor& r, std::size_t axis_r, const Tensor& s, std::size_t axis_s) {
  if (axis_r >= r.order() || axis_s >= s.order()) throw ShapeError("contract: axis out of range");
  std::vector<std::size_t> pr, ps;
  for (std::size_t a = 0; a < r.order(); ++a)
    if (a != axis_r) pr.push_back(a);
  pr.push_back(axis_r);
  ps.push_back(axis_s);
  for (std::size_t a = 0; a < s.order(); ++a)
    if (a != axis_s) ps.push_back(a);
  return contract(permute_axes(r, pr), permute_axes(s, ps));
}

Tensor mode_contract(const Matrix& m, const Tensor& t, std::size_t mode) {
  if (mode >= t.order()) throw ShapeError("mode_contract: mode out of range");
  if (static_cast<std::size_t>(m.cols()) != t.dim(mode)) throw ShapeError("mode_contract: length mismatch");
  const std::size_t left = product(std::span(t.dims()).first(mode));
  const std::size_t n = t.dim(mode);
  const std::size_t right = product(std::span(t.dims()).subspan(mode + 1));
  std::vector<std::size_t> dims = t.dims();
  dims[mode] = static_cast<std::size_t>(m.rows());
  Tensor out(dims);
  const auto ni = static_cast<Eigen::Index>(n);
  const auto ri = static_cast<Eigen::Index>(right);
  for (std::size_t l = 0; l < left; ++l) {
    Eigen::Map<const RowMatrix> src(t.data().data() + l * n * right, ni, ri);
    Eigen::Map<RowMatrix> dst(out.data().data() + l * static_cast<std::size_t>(m.rows()) * right, m.rows(), ri);
    dst.noalias() = m * src;
  }
  return out;
}

std::size_t KronMap::operator()(std::size_t i_left, std::size_t i_right) const {
  if (i_left >= n_left || i_right >= n_right) throw std::out_of_range("KronMap index out of range");
  return i_left * n_right + i_right;
}

std::pair<std::size_t, std::size_t> KronMap::inverse(std::size_t merged) const {
  if (merged >= size()) throw std::out_of_range("KronMap merged index out of range");
  return {merged / n_right, merged % n_right};
}

std::size_t kron_index(std::span<const std::size_t> dims, std::span<const std::size_t> index) {
  if (dims.size() != index.size()) throw ShapeError("kron_index: order mismatch");
  std::size_t m = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (index[k] >= dims[k]) throw std::out_of_range("kron_index out of range");
    m = m * dims[k] + index[k];
  }
  return m;
}

std::vector<std::size_t> kron_index_inv(std::span<const std::size_t> dims, std::size_t merged) {
  if (merged >= product(dims)) throw std::out_of_range("kron_index_inv out of range");
  std::vector<std::size_t> idx(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    idx[k] = merged % dims[k];
    merged /= dims[k];
  }
  return idx;
}

TTCore::TTCore(Tensor t) : t_(std::move(t)) {
  if (t_.order() != 3 && t_.order() != 4) throw ShapeError("TT core must have order 3 or 4");
  if (t_.order() == 4 && t_.dim(1) != t_.dim(2)) throw ShapeError("operator core must be square");
}

void validate_chain(std::span<const TTCore> cores) {
  if (cores.empty()) throw ShapeError("empty TT chain");
  if (cores.front().left_rank() != 1) throw ShapeError("TT chain must start with rank 1");
  for (std::size_t k = 1; k < cores.size(); ++k)
    if (cores[k].left_rank() != cores[k - 1].right_rank())
      throw ShapeError("TT rank mismatch between cores " + std::to_string(k - 1) + " and " + std::to_string(k));
}

Tensor tt_reconstruct(std::span<const TTCore> cores, const Vector* coeffs) {
  validate_chain(cores);
  Tensor acc = cores.front().tensor();
  acc = acc.reshaped(std::vector<std::size_t>(acc.dims().begin() + 1, acc.dims().end()));
  for (std::size_t k = 1; k < cores.size(); ++k) acc = contract(acc, cores[k].tensor());
  if (!coeffs) return acc;
  if (static_cast<std::size_t>(coeffs->size()) != acc.dims().back())
    throw ShapeError("tt_reconstruct: coefficient length mismatch");
  std::vector<std::size_t> dims(acc.dims().begin(), acc.dims().end() - 1);
  Vector flat = acc.unfold(acc.order() - 1) * (*coeffs);
  return Tensor(std::move(dims), std::vector<double>(flat.data(), flat.data() + flat.size()));
}

Matrix tt_merge(std::span<const TTCore> cores) {
  const Tensor t = tt_reconstruct(cores);
  return t.unfold(t.order() - 1);
}

}  // namespace ttrb
