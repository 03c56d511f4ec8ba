#pragma once

// Moving a trained model to a larger camera set while retraining only the
// last per-camera FC layer and the fusion layer.

#include <vector>

#include "tactile/train/trainer.hpp"

namespace tactile::train {

struct RecalibrationOptions {
  TrainOptions train;  // train.data_fraction is the fraction f
  /// Re-initialize the last FC layer instead of starting from the old one.
  bool fresh_last_fc = false;
  /// Camera index in the new model for each camera of the old one;
  /// empty means 0, 1, 2, ...
  std::vector<std::size_t> camera_map;
  std::uint64_t init_seed = 7;  // for the new fusion rows and blocks
};

struct RecalibrationResult {
  nn::Network<float> model;
  TrainReport report;
  /// Every frozen parameter and running statistic equals the source model's.
  bool frozen_identical = false;
};

/// Builds the re-dimensioned model without training it. Conv/BN layers and
/// the first FC layer are copied and frozen; fusion rows of bins the old
/// model predicted keep their weights for the old cameras.
nn::Network<float> expand_model(const nn::Network<float>& old_model, std::uint32_t camera_count,
                                const std::vector<std::uint32_t>& output_bins,
                                const RecalibrationOptions& opt);

/// Throws ValidationError for f outside (0, 1] or incompatible inputs.
RecalibrationResult recalibrate(const nn::Network<float>& old_model, const Dataset& data,
                                const std::vector<std::uint32_t>& output_bins,
                                const RecalibrationOptions& opt);

/// Compares the frozen layers of `model` against the same layers of `source`.
bool frozen_layers_identical(const nn::Network<float>& source, const nn::Network<float>& model);

}  // namespace tactile::train
