#pragma once

#include <span>
#include <vector>

#include "tactile/contact.hpp"

namespace tactile::train {

struct AxisValues {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double operator[](Axis a) const { return a == Axis::x ? x : a == Axis::y ? y : z; }
  double& operator[](Axis a) { return a == Axis::x ? x : a == Axis::y ? y : z; }
};

/// RMSE_distribution: RMS over samples and bins of the per-bin error.
/// RMSE_total: RMS over samples of the error of the per-axis bin sums.
struct Metrics {
  AxisValues distribution;
  AxisValues total;
};

/// The four figures reported for recalibration runs: horizontal axes pooled
/// as sqrt((x^2 + y^2) / 2), vertical axis as is.
struct FourMetrics {
  double distribution_xy = 0.0;
  double total_xy = 0.0;
  double distribution_z = 0.0;
  double total_z = 0.0;

  double operator[](std::size_t i) const;
};
FourMetrics four_metrics(const Metrics& m);

/// bins restricts both families to a subset of bins; empty means all.
Metrics compute_metrics(std::span<const ForceDistribution> predicted,
                        std::span<const ForceDistribution> truth,
                        std::span<const std::uint32_t> bins = {});

/// Least-squares line y = intercept + slope * x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);

}  // namespace tactile::train
