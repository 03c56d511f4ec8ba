#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tactile/nn/tensor.hpp"

namespace tactile::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam. Moment buffers are bound to the parameter list of
/// the first step; later steps must pass the same list in the same order.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  /// Throws NumericalError (naming the parameter) on a non-finite gradient,
  /// before anything is modified.
  void step(std::span<Parameter<float>* const> params);

  std::uint64_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  const std::vector<std::vector<float>>& first_moments() const { return m_; }
  const std::vector<std::vector<float>>& second_moments() const { return v_; }

 private:
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
};

}  // namespace tactile::nn
