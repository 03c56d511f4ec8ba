#include <cmath>

#include "tactile/simd/kernels.hpp"

namespace tactile::simd {
namespace {

float dot(const float* a, const float* b, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(float alpha, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

float sum_squares(const float* x, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void adam_update(float* param, const float* grad, float* m, float* v,
                 std::size_t n, const AdamCoefficients& c) {
  const float one_m_b1 = c.one_minus_beta1;
  const float one_m_b2 = c.one_minus_beta2;
  const float inv_bc1 = 1.0f / c.bias_correction1;
  const float inv_bc2 = 1.0f / c.bias_correction2;
  for (std::size_t i = 0; i < n; ++i) {
    const float g = grad[i];
    m[i] = c.beta1 * m[i] + one_m_b1 * g;
    v[i] = c.beta2 * v[i] + one_m_b2 * g * g;
    const float m_hat = m[i] * inv_bc1;
    const float v_hat = v[i] * inv_bc2;
    param[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::scalar, "scalar", &dot, &axpy,
                                 &sum_squares, &adam_update};
  return table;
}

}  // namespace tactile::simd
