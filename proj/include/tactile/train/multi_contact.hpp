#pragma once

// Detecting several simultaneous contacts with a model trained on single
// indentations. Loads are superposed (linear elasticity), rendered, and the
// local maxima of the predicted Fz map are matched to the true centers.

#include <span>
#include <string>
#include <vector>

#include "tactile/nn/network.hpp"
#include "tactile/optics.hpp"

namespace tactile::train {

struct MultiContactOptions {
  double match_radius_bins = 2.0;    // Euclidean, in bin units
  double threshold_fraction = 0.5;   // of the weaker true Fz peak
};

struct MultiContactReport {
  bool unsupported = false;  // outside the claim: shared quadrant or patch leaves the FOV
  std::string reason;
  std::vector<std::size_t> true_bins;   // bin of each contact center
  std::vector<std::size_t> maxima;      // predicted Fz local maxima above threshold
  double threshold = 0.0;               // N
  bool success = false;
};

/// Camera whose quadrant holds the point (nearest camera center).
std::size_t quadrant_of(Vec2 p, const SensorConfig& cfg);

/// Bins whose Fz exceeds the threshold and is not exceeded by any of the 8
/// neighbours (plateaus report their first bin in row-major order).
std::vector<std::size_t> local_maxima(const ForceDistribution& f, double threshold);

MultiContactReport multi_contact_eval(nn::Network<float>& model, const CaptureRig& rig,
                                      std::span<const Indentation> contacts,
                                      const MultiContactOptions& opt = {});

}  // namespace tactile::train
