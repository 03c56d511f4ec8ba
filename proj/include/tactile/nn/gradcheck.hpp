#pragma once

// Reverse-mode vs central finite differences, in double precision.
//
// The scalar probed is L = sum_i r_i * y_i with fixed random weights r, so
// every output element contributes. Points where a +-h perturbation flips
// a ReLU mask or a pooling argmax are reported as excluded, not failed.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tactile/nn/layers.hpp"
#include "tactile/nn/network.hpp"

namespace tactile::nn {

struct GradCheckOptions {
  double step = 1e-4;      // relative to max(1, |value|)
  double floor = 1e-6;     // gradients below this count as zero
  double tolerance = 1e-4;
  std::size_t max_points_per_tensor = 64;
  bool check_input = true;
  Mode mode = Mode::train;
  std::uint64_t seed = 1;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t excluded = 0;
  std::string worst;  // "<tensor>[<index>]"
  bool passed = true;
};

using Fragment = std::vector<std::unique_ptr<Layer<double>>>;

GradCheckReport gradient_check(Fragment& layers, const Tensor<double>& input,
                               const GradCheckOptions& opt = {});
GradCheckReport gradient_check(Network<double>& net, const Tensor<double>& input,
                               const GradCheckOptions& opt = {});

}  // namespace tactile::nn
