#include "tactile/train/dataset.hpp"

#include <algorithm>
#include <fstream>

#include "tactile/binary_io.hpp"
#include "tactile/parallel.hpp"
#include "tactile/rng.hpp"

namespace tactile::train {

using namespace tactile::io;

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split split_of(std::uint64_t seed, std::uint64_t sample_id, double train_fraction, double val_fraction) {
  const double u = hash_unit(derive_seed(seed, sample_id ^ 0x73706c6974ULL));
  if (u < train_fraction) return Split::train;
  if (u < train_fraction + val_fraction) return Split::val;
  return Split::test;
}

void IndentationGrid::validate(const SensorConfig& cfg) const {
  if (nx == 0 || ny == 0 || depths.empty()) throw ValidationError("indentation grid is empty");
  if (margin < 0.0 || 2 * margin > cfg.surface_width_x || 2 * margin > cfg.surface_width_y)
    throw ValidationError("grid margin leaves no room on the surface");
  for (double d : depths)
    if (!(d > 0.0 && d <= cfg.max_depth + 1e-12))
      throw ValidationError("grid depth " + std::to_string(d) + " outside (0, max_depth]");
}

std::vector<Indentation> IndentationGrid::indentations(const SensorConfig& cfg) const {
  validate(cfg);
  const auto axis = [&](std::uint32_t n, std::uint32_t i, double width) {
    if (n == 1) return 0.5 * width;
    return margin + (width - 2 * margin) * i / (n - 1.0);
  };
  std::vector<Indentation> out;
  out.reserve(size());
  for (std::uint32_t iy = 0; iy < ny; ++iy)
    for (std::uint32_t ix = 0; ix < nx; ++ix)
      for (double d : depths)
        out.push_back({{axis(nx, ix, cfg.surface_width_x), axis(ny, iy, cfg.surface_width_y)}, d, cfg.tip_radius});
  return out;
}

std::vector<std::size_t> Dataset::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].split == s) out.push_back(i);
  return out;
}

double Dataset::max_total_force() const {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, s.label.total(Axis::z));
  return m;
}

bool truncated_contact(const Indentation& ind, double width_x, double width_y) {
  const double a = ind.contact_radius();
  return ind.center.x - a < 0.0 || ind.center.x + a > width_x || ind.center.y - a < 0.0 ||
         ind.center.y + a > width_y;
}

namespace {

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

Dataset generate_dataset(const CaptureRig& rig, const IndentationGrid& grid, std::uint64_t seed,
                         std::uint64_t config_hash) {
  const SensorConfig& cfg = rig.config();
  const auto inds = grid.indentations(cfg);
  Dataset data;
  data.camera_count = static_cast<std::uint32_t>(cfg.camera_count());
  data.image_size = cfg.image_size;
  data.grid = cfg.bins;
  data.seed = seed;
  data.config_hash = config_hash;
  data.tip_radius = cfg.tip_radius;
  data.surface_width_x = cfg.surface_width_x;
  data.surface_width_y = cfg.surface_width_y;
  data.samples.resize(inds.size());
  parallel_for(inds.size(), [&](std::size_t i) {
    Sample& s = data.samples[i];
    s.id = i;
    s.split = split_of(seed, i);
    Indentation ind = inds[i];
    ind.center = {to_f32(ind.center.x), to_f32(ind.center.y)};
    ind.depth = to_f32(ind.depth);
    s.indentation = ind;
    s.label = bin_forces(ind, cfg);
    for (double& v : s.label.values) v = to_f32(v);
    s.frames = rig.capture(s.label, i).frames;
  });
  return data;
}

Dataset generate_dataset(const SensorConfig& cfg, const IndentationGrid& grid, std::uint64_t seed,
                         std::uint64_t config_hash) {
  cfg.validate();
  grid.validate(cfg);
  const CaptureRig rig(cfg, ParticleField::generate(cfg, cfg.rng_seed));
  return generate_dataset(rig, grid, seed, config_hash);
}

Dataset restrict_to_cameras(const Dataset& data, std::span<const std::size_t> cameras) {
  if (cameras.empty()) throw ValidationError("camera subset is empty");
  for (auto k : cameras)
    if (k >= data.camera_count) throw ValidationError("camera " + std::to_string(k) + " not in dataset");
  Dataset out = data;
  out.camera_count = static_cast<std::uint32_t>(cameras.size());
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    auto& frames = out.samples[i].frames;
    frames.clear();
    for (auto k : cameras) frames.push_back(data.samples[i].frames[k]);
  }
  return out;
}

void save_dataset(std::ostream& out, const Dataset& data) {
  put_magic(out, "TDS1");
  put_u32(out, kDatasetVersion);
  put_u32(out, data.camera_count);
  put_u32(out, data.image_size);
  put_u32(out, data.grid.nx);
  put_u32(out, data.grid.ny);
  put_u32(out, static_cast<std::uint32_t>(data.samples.size()));
  put_u64(out, data.seed);
  put_u64(out, data.config_hash);
  put_f64(out, data.tip_radius);
  put_f64(out, data.surface_width_x);
  put_f64(out, data.surface_width_y);
  const std::size_t pixels = std::size_t{data.image_size} * data.image_size;
  for (const Sample& s : data.samples) {
    if (s.frames.size() != data.camera_count || s.label.bin_count() != data.grid.count())
      throw ValidationError("sample " + std::to_string(s.id) + " does not match the dataset header");
    put_u8(out, static_cast<std::uint8_t>(s.split));
    put_f32(out, static_cast<float>(s.indentation.center.x));
    put_f32(out, static_cast<float>(s.indentation.center.y));
    put_f32(out, static_cast<float>(s.indentation.depth));
    for (const Image& img : s.frames) {
      if (img.pixels.size() != pixels) throw ValidationError("frame size does not match the dataset header");
      for (float p : img.pixels) put_f32(out, p);
    }
    for (double v : s.label.values) put_f32(out, static_cast<float>(v));
  }
  if (!out) throw ValidationError("failed to write dataset");
}

Dataset load_dataset(std::istream& in) {
  expect_magic(in, "TDS1", "dataset");
  const std::uint32_t version = get_u32(in);
  if (version != kDatasetVersion) throw ValidationError("unsupported dataset version " + std::to_string(version));
  Dataset data;
  data.camera_count = checked_count(get_u32(in), 64, "camera");
  data.image_size = checked_count(get_u32(in), 4096, "pixel");
  data.grid.nx = checked_count(get_u32(in), 4096, "bin");
  data.grid.ny = checked_count(get_u32(in), 4096, "bin");
  const std::uint32_t count = checked_count(get_u32(in), 1u << 24, "sample");
  data.seed = get_u64(in);
  data.config_hash = get_u64(in);
  data.tip_radius = get_f64(in);
  data.surface_width_x = get_f64(in);
  data.surface_width_y = get_f64(in);
  const std::uint32_t size = data.image_size;
  data.samples.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Sample& s = data.samples[i];
    s.id = i;
    const std::uint8_t split = get_u8(in);
    if (split > 2) throw ValidationError("sample " + std::to_string(i) + ": bad split tag");
    s.split = static_cast<Split>(split);
    s.indentation.center.x = get_f32(in);
    s.indentation.center.y = get_f32(in);
    s.indentation.depth = get_f32(in);
    s.indentation.tip_radius = data.tip_radius;
    s.frames.assign(data.camera_count, Image(size));
    for (Image& img : s.frames)
      for (float& p : img.pixels) p = get_f32(in);
    s.label = ForceDistribution(data.grid);
    for (double& v : s.label.values) v = get_f32(in);
    s.label.truncated = truncated_contact(s.indentation, data.surface_width_x, data.surface_width_y);
  }
  return data;
}

void save_dataset(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  save_dataset(out, data);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  return load_dataset(in);
}

}  // namespace tactile::train
