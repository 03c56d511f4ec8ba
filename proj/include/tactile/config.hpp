#pragma once

// Run configuration in a flat "key = value" text format. '#' starts a
// comment. Every key is optional and overrides the desk-scale default;
// unknown or repeated keys are errors.
//
//   camera_positions = 12.25 12.75 0; 36.75 12.75 0
//   indent_depths = 0.3, 0.6, 0.9

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tactile/geometry.hpp"
#include "tactile/train/dataset.hpp"
#include "tactile/train/trainer.hpp"

namespace tactile {

struct Config {
  SensorConfig sensor = SensorConfig::desk_scale();
  DimensioningSpec dimensioning;
  train::IndentationGrid grid;
  train::TrainOptions train;  // train.seed follows `seed`
  std::uint64_t seed = 1;     // dataset split, initialization, shuffling

  /// Validates every section.
  void validate() const;
};

/// Throws ValidationError with the line number on malformed input.
Config parse_config(std::string_view text);
Config load_config(const std::string& path);

/// Every key in a fixed order with round-trip precision.
std::string to_text(const Config& cfg);

/// FNV-1a over to_text(cfg).
std::uint64_t config_hash(const Config& cfg);

std::vector<std::string> config_keys();

}  // namespace tactile
