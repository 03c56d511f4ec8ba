#include "tactile/train/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "tactile/errors.hpp"

namespace tactile::train {

Metrics compute_metrics(std::span<const ForceDistribution> predicted, std::span<const ForceDistribution> truth,
                        std::span<const std::uint32_t> bins) {
  if (predicted.size() != truth.size()) throw ValidationError("metrics: prediction/label count mismatch");
  if (predicted.empty()) throw ValidationError("metrics: empty sample set");
  std::vector<std::uint32_t> all;
  if (bins.empty()) {
    all.resize(truth.front().bin_count());
    for (std::size_t b = 0; b < all.size(); ++b) all[b] = static_cast<std::uint32_t>(b);
    bins = all;
  }
  constexpr Axis axes[] = {Axis::x, Axis::y, Axis::z};
  double dist_sq[3] = {0, 0, 0};
  double total_sq[3] = {0, 0, 0};
  for (std::size_t s = 0; s < truth.size(); ++s) {
    if (predicted[s].values.size() != truth[s].values.size()) throw ValidationError("metrics: grid mismatch");
    for (int a = 0; a < 3; ++a) {
      double sum_err = 0.0;
      for (auto b : bins) {
        const double e = predicted[s].at(b, axes[a]) - truth[s].at(b, axes[a]);
        dist_sq[a] += e * e;
        sum_err += e;
      }
      total_sq[a] += sum_err * sum_err;
    }
  }
  Metrics m;
  const double n = static_cast<double>(truth.size());
  for (int a = 0; a < 3; ++a) {
    m.distribution[axes[a]] = std::sqrt(dist_sq[a] / (n * bins.size()));
    m.total[axes[a]] = std::sqrt(total_sq[a] / n);
  }
  return m;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("fit_line: need two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("fit_line: x values are all equal");
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double FourMetrics::operator[](std::size_t i) const {
  switch (i) {
    case 0: return distribution_xy;
    case 1: return total_xy;
    case 2: return distribution_z;
    case 3: return total_z;
    default: throw ValidationError("metric index out of range");
  }
}

FourMetrics four_metrics(const Metrics& m) {
  const auto pooled = [](const AxisValues& v) { return std::sqrt(0.5 * (v.x * v.x + v.y * v.y)); };
  return {pooled(m.distribution), pooled(m.total), m.distribution.z, m.total.z};
}

}  // namespace tactile::train
