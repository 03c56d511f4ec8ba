#pragma once

// Indentation-grid datasets and the "TDS1" file format.
//
//   magic "TDS1", u32 version
//   header: u32 cameras, u32 image size, u32 nx, u32 ny, u32 samples,
//           u64 seed, u64 config hash, f64 tip radius,
//           f64 surface width x, f64 surface width y
//   per sample: u8 split, f32 center x, f32 center y, f32 depth,
//               f32 frames[cameras][size][size], f32 label[bins][3]
//
// Values are rounded to f32 when a dataset is generated, so an in-memory
// dataset and its file are interchangeable bit for bit.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tactile/contact.hpp"
#include "tactile/optics.hpp"

namespace tactile::train {

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

std::string_view to_string(Split s);

/// Split tag from (seed, sample id) alone: a hash in [0, 1) compared against
/// the cumulative train/val fractions.
Split split_of(std::uint64_t seed, std::uint64_t sample_id, double train_fraction = 0.7,
               double val_fraction = 0.1);

struct IndentationGrid {
  std::uint32_t nx = 9;
  std::uint32_t ny = 9;
  std::vector<double> depths{0.3, 0.6, 0.9, 1.2, 1.5};  // mm
  double margin = 4.0;  // mm kept free along every surface edge

  /// Row-major positions (x fastest) with depth innermost.
  std::vector<Indentation> indentations(const SensorConfig& cfg) const;
  std::size_t size() const { return std::size_t{nx} * ny * depths.size(); }
  void validate(const SensorConfig& cfg) const;
};

struct Sample {
  std::uint64_t id = 0;
  Split split = Split::train;
  Indentation indentation;
  std::vector<Image> frames;  // difference images, one per camera
  ForceDistribution label;
};

struct Dataset {
  std::uint32_t camera_count = 0;
  std::uint32_t image_size = 0;
  BinGrid grid;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  double tip_radius = 0.0;
  double surface_width_x = 0.0;
  double surface_width_y = 0.0;
  std::vector<Sample> samples;

  std::vector<std::size_t> indices(Split s) const;
  std::size_t count(Split s) const { return indices(s).size(); }
  double max_total_force() const;
};

/// One sample per grid indentation, captured in parallel. Deterministic in
/// (cfg, grid, seed); the particle field is drawn from cfg.rng_seed.
Dataset generate_dataset(const SensorConfig& cfg, const IndentationGrid& grid, std::uint64_t seed,
                         std::uint64_t config_hash = 0);
Dataset generate_dataset(const CaptureRig& rig, const IndentationGrid& grid, std::uint64_t seed,
                         std::uint64_t config_hash = 0);

/// Keeps only the listed cameras' frames, in the given order.
Dataset restrict_to_cameras(const Dataset& data, std::span<const std::size_t> cameras);

/// True when the contact circle of the indentation crosses the surface edge.
bool truncated_contact(const Indentation& ind, double width_x, double width_y);

inline constexpr std::uint32_t kDatasetVersion = 1;

void save_dataset(std::ostream& out, const Dataset& data);
Dataset load_dataset(std::istream& in);
void save_dataset(const std::string& path, const Dataset& data);
Dataset load_dataset(const std::string& path);

}  // namespace tactile::train
