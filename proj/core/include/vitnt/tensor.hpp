#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vitnt {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

// Dense row-major f32 array. A default-constructed Tensor is empty (rank 0,
// no data); every other Tensor has rank >= 1 and strictly positive dims.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);  // zero-filled
  Tensor(Shape shape, std::vector<float> data);

  static Tensor filled(Shape shape, float value);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // Rows/cols view a rank-2 tensor; a rank-1 tensor is a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const float> data() const& noexcept { return data_; }
  std::span<float> data() & noexcept { return data_; }
  std::span<const float> data() && = delete;

  std::span<const float> row(std::size_t r) const;
  std::span<float> row(std::size_t r);

  float operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  float& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  float operator[](std::size_t i) const { return data_[i]; }
  float& operator[](std::size_t i) { return data_[i]; }

  Tensor reshaped(Shape shape) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

// Kernels. All are pure. Inner products accumulate in f32, left to right over
// the shared index; row statistics (softmax denominators, norms, LN moments)
// accumulate in f64 and are rounded once.

// a[m x k] * b[k x n]
Tensor matmul(const Tensor& a, const Tensor& b);

// a[m x k] * b[n x k]^T, i.e. both operands are walked along their rows.
Tensor matmul_transposed(const Tensor& a, const Tensor& b);

// x[m x in] * weight[out x in]^T + bias[out]; weight uses the (out, in) layout
// of common checkpoints.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, float factor);

Tensor softmax_rows(const Tensor& x);

inline constexpr float kLayerNormEps = 1e-6f;
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  float eps = kLayerNormEps);

// Exact GELU, x * Phi(x) = 0.5 x (1 + erf(x / sqrt 2)); not the tanh variant.
Tensor gelu(const Tensor& x);

inline constexpr float kL2NormEps = 1e-12f;
// Each row divided by max(||row||, eps). Zero rows stay zero.
Tensor l2_normalize_rows(const Tensor& x, float eps = kL2NormEps);

}  // namespace vitnt
