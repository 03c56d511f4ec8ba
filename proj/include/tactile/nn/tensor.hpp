#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tactile/errors.hpp"
#include "tactile/simd/kernels.hpp"

namespace tactile::nn {

enum class Mode { train, eval };

/// Dense row-major tensor. Batches of images use [N, C, H, W].
template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s, T fill = T{0})
      : shape(std::move(s)), data(element_count(shape), fill) {}

  static std::size_t element_count(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>{});
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }
  std::span<T> span() { return data; }
  std::span<const T> span() const { return data; }

  /// Same data, new shape; element count must match.
  Tensor reshaped(std::vector<std::size_t> s) const& {
    Tensor out;
    out.shape = std::move(s);
    if (element_count(out.shape) != data.size()) throw ValidationError("reshape: size mismatch");
    out.data = data;
    return out;
  }
  Tensor reshaped(std::vector<std::size_t> s) && {
    if (element_count(s) != data.size()) throw ValidationError("reshape: size mismatch");
    shape = std::move(s);
    return std::move(*this);
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }
};

std::string shape_string(const std::vector<std::size_t>& shape);

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter() = default;
  Parameter(std::string n, std::vector<std::size_t> shape)
      : name(std::move(n)), value(shape), grad(shape) {}

  void zero_grad() { grad.fill(T{0}); }
};

// Float routes through the dispatched SIMD kernels; double (used by the
// gradient checker) stays on plain loops.
namespace ops {

inline float dot(const float* a, const float* b, std::size_t n) {
  return simd::kernels().dot(a, b, n);
}
inline double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

inline void axpy(float alpha, const float* x, float* y, std::size_t n) {
  simd::kernels().axpy(alpha, x, y, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace ops
}  // namespace tactile::nn
