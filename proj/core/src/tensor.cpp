#include "vitnt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "vitnt/error.hpp"

namespace vitnt {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_numel(const Shape& shape) {
  if (shape.empty()) return 0;
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have rank >= 1");
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor shape " + shape_to_string(shape) + " has a zero dimension");
  }
}

void require_rank2(const Tensor& t, const char* what) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(what) + ": expected a matrix, got shape " + shape_to_string(t.shape()));
  }
}

void require_vector_of(const Tensor& t, std::size_t n, const char* what) {
  if (t.size() != n || t.rank() != 1) {
    throw DimensionError(std::string(what) + ": expected [" + std::to_string(n) + "], got " +
                         shape_to_string(t.shape()));
  }
}

}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_numel(shape_), 0.0f);
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_numel(shape_)) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_to_string(shape_));
  }
}

Tensor Tensor::filled(Shape shape, float value) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_to_string(shape_));
  }
  return shape_[axis];
}

std::size_t Tensor::rows() const {
  if (shape_.size() == 1) return 1;
  if (shape_.size() == 2) return shape_[0];
  throw DimensionError("rows() needs rank 1 or 2, got " + shape_to_string(shape_));
}

std::size_t Tensor::cols() const { return shape_.empty() ? 0 : shape_.back(); }

std::span<const float> Tensor::row(std::size_t r) const {
  const auto n = cols();
  return std::span<const float>(data_).subspan(r * n, n);
}

std::span<float> Tensor::row(std::size_t r) {
  const auto n = cols();
  return std::span<float>(data_).subspan(r * n, n);
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul lhs");
  require_rank2(b, "matmul rhs");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_to_string(a.shape()) + " x " +
                         shape_to_string(b.shape()));
  }
  Tensor out({m, n});
  // i-t-j order: each output still accumulates over t in increasing order, and the j loop vectorizes.
  for (std::size_t i = 0; i < m; ++i) {
    auto o = out.row(i);
    const auto ar = a.row(i);
    for (std::size_t t = 0; t < k; ++t) {
      const float av = ar[t];
      const auto br = b.row(t);
      for (std::size_t j = 0; j < n; ++j) o[j] += av * br[j];
    }
  }
  return out;
}

Tensor matmul_transposed(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_transposed lhs");
  require_rank2(b, "matmul_transposed rhs");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k) {
    throw DimensionError("matmul_transposed: inner dimensions differ, " + shape_to_string(a.shape()) + " x " +
                         shape_to_string(b.shape()) + "^T");
  }
  Tensor out({m, n});
  // Four independent dot products at a time; each keeps its own left-to-right sum.
  for (std::size_t i = 0; i < m; ++i) {
    const float* ar = a.row(i).data();
    auto o = out.row(i);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const float* b0 = b.row(j).data();
      const float* b1 = b0 + k;
      const float* b2 = b1 + k;
      const float* b3 = b2 + k;
      float acc0 = 0.0f, acc1 = 0.0f, acc2 = 0.0f, acc3 = 0.0f;
      for (std::size_t t = 0; t < k; ++t) {
        const float av = ar[t];
        acc0 += av * b0[t];
        acc1 += av * b1[t];
        acc2 += av * b2[t];
        acc3 += av * b3[t];
      }
      o[j] = acc0;
      o[j + 1] = acc1;
      o[j + 2] = acc2;
      o[j + 3] = acc3;
    }
    for (; j < n; ++j) {
      const float* br = b.row(j).data();
      float acc = 0.0f;
      for (std::size_t t = 0; t < k; ++t) acc += ar[t] * br[t];
      o[j] = acc;
    }
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  Tensor out = matmul_transposed(x, weight);
  require_vector_of(bias, out.cols(), "linear bias");
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: shapes differ, " + shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
  }
  Tensor out = a;
  auto o = out.data();
  const auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return out;
}

Tensor scale(const Tensor& x, float factor) {
  Tensor out = x;
  for (auto& v : out.data()) v *= factor;
  return out;
}

Tensor softmax_rows(const Tensor& x) {
  require_rank2(x, "softmax_rows");
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto in = x.row(i);
    auto o = out.row(i);
    const float mx = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      o[j] = std::exp(in[j] - mx);
      sum += o[j];
    }
    const double inv = 1.0 / sum;
    for (auto& v : o) v = static_cast<float>(v * inv);
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps) {
  require_rank2(x, "layer_norm");
  if (!(eps > 0.0f)) throw ContractViolation("layer_norm: eps must be positive");
  const std::size_t n = x.cols();
  require_vector_of(gamma, n, "layer_norm gamma");
  require_vector_of(beta, n, "layer_norm beta");
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto in = x.row(i);
    double mean = 0.0;
    for (float v : in) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (float v : in) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double inv_std = 1.0 / std::sqrt(var + static_cast<double>(eps));
    auto o = out.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      o[j] = static_cast<float>((in[j] - mean) * inv_std) * gamma[j] + beta[j];
    }
  }
  return out;
}

Tensor gelu(const Tensor& x) {
  Tensor out = x;
  for (auto& v : out.data()) {
    const double d = v;
    v = static_cast<float>(0.5 * d * (1.0 + std::erf(d / std::sqrt(2.0))));
  }
  return out;
}

Tensor l2_normalize_rows(const Tensor& x, float eps) {
  if (!(eps > 0.0f)) throw ContractViolation("l2_normalize_rows: eps must be positive");
  Tensor out = x;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    double sq = 0.0;
    for (float v : r) sq += static_cast<double>(v) * v;
    const double denom = std::max(std::sqrt(sq), static_cast<double>(eps));
    for (auto& v : r) v = static_cast<float>(v / denom);
  }
  return out;
}

}  // namespace vitnt
