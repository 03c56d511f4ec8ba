#include "tactile/train/multi_contact.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tactile::train {

std::size_t quadrant_of(Vec2 p, const SensorConfig& cfg) {
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t k = 0; k < cfg.camera_count(); ++k) {
    const auto& c = cfg.camera_positions[k];
    const double d = std::hypot(p.x - c.x, p.y - c.y);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::vector<std::size_t> local_maxima(const ForceDistribution& f, double threshold) {
  const long nx = f.grid.nx, ny = f.grid.ny;
  std::vector<std::size_t> out;
  for (long iy = 0; iy < ny; ++iy) {
    for (long ix = 0; ix < nx; ++ix) {
      const std::size_t b = static_cast<std::size_t>(ix + nx * iy);
      const double v = f.at(b, Axis::z);
      if (!(v > threshold)) continue;
      bool peak = true;
      for (long dy = -1; dy <= 1 && peak; ++dy)
        for (long dx = -1; dx <= 1; ++dx) {
          const long qx = ix + dx, qy = iy + dy;
          if ((dx == 0 && dy == 0) || qx < 0 || qy < 0 || qx >= nx || qy >= ny) continue;
          const double w = f.at(static_cast<std::size_t>(qx + nx * qy), Axis::z);
          // ties go to the neighbour that comes first in row-major order
          const bool earlier = qy < iy || (qy == iy && qx < ix);
          if (w > v || (earlier && w == v)) {
            peak = false;
            break;
          }
        }
      if (peak) out.push_back(b);
    }
  }
  return out;
}

MultiContactReport multi_contact_eval(nn::Network<float>& model, const CaptureRig& rig,
                                      std::span<const Indentation> contacts, const MultiContactOptions& opt) {
  const SensorConfig& cfg = rig.config();
  MultiContactReport rep;
  if (contacts.empty()) throw ValidationError("no contacts given");

  std::vector<std::size_t> quads;
  for (const auto& c : contacts) {
    c.validate(cfg);
    const std::size_t q = quadrant_of(c.center, cfg);
    if (std::find(quads.begin(), quads.end(), q) != quads.end()) {
      rep.unsupported = true;
      rep.reason = "two contacts share camera quadrant " + std::to_string(q);
    }
    quads.push_back(q);
    const double a = c.contact_radius();
    for (int i = 0; i < 16 && !rep.unsupported; ++i) {
      const double t = 2.0 * std::numbers::pi * i / 16;
      const Vec2 p{c.center.x + a * std::cos(t), c.center.y + a * std::sin(t)};
      if (p.x < 0 || p.y < 0 || p.x > cfg.surface_width_x || p.y > cfg.surface_width_y || !camera_sees(q, p, cfg)) {
        rep.unsupported = true;
        rep.reason = "contact patch leaves the field of view of camera " + std::to_string(q);
      }
    }
    rep.true_bins.push_back(bin_index(c.center, cfg));
  }
  if (rep.unsupported) return rep;

  ForceDistribution load(cfg.bins);
  double weakest = INFINITY;
  for (const auto& c : contacts) {
    const ForceDistribution f = bin_forces(c, cfg);
    double peak = 0.0;
    for (std::size_t b = 0; b < f.bin_count(); ++b) peak = std::max(peak, f.at(b, Axis::z));
    weakest = std::min(weakest, peak);
    load += f;
  }
  rep.threshold = opt.threshold_fraction * weakest;

  const ForceDistribution pred = nn::predict(model, rig.capture(load));
  rep.maxima = local_maxima(pred, rep.threshold);

  const auto dist = [&](std::size_t a, std::size_t b) {
    const double ax = a % cfg.bins.nx, ay = a / cfg.bins.nx, bx = b % cfg.bins.nx, by = b / cfg.bins.nx;
    return std::hypot(ax - bx, ay - by);
  };
  // Each contact must claim its own maximum; greedy is exact here because
  // the contacts sit in different quadrants, far beyond the match radius.
  std::vector<bool> used(rep.maxima.size(), false);
  bool all = rep.maxima.size() == contacts.size();
  for (std::size_t t : rep.true_bins) {
    bool found = false;
    for (std::size_t m = 0; m < rep.maxima.size() && !found; ++m)
      if (!used[m] && dist(t, rep.maxima[m]) <= opt.match_radius_bins) used[m] = found = true;
    all = all && found;
  }
  rep.success = all;
  return rep;
}

}  // namespace tactile::train
