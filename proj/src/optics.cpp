#include "tactile/optics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "tactile/errors.hpp"
#include "tactile/rng.hpp"

namespace tactile {

ParticleField ParticleField::generate(const SensorConfig& cfg, std::uint64_t seed) {
  ParticleField field;
  field.seed = seed;
  field.radius_px = cfg.particle_radius_px;
  const double area = cfg.surface_width_x * cfg.surface_width_y;
  const auto count = static_cast<std::size_t>(std::llround(area * cfg.particle_density));
  Rng rng(derive_seed(seed, 0x70617274));  // "part"
  field.positions.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = rng.uniform(0.0, cfg.surface_width_x);
    const double y = rng.uniform(0.0, cfg.surface_width_y);
    field.positions.push_back({x, y, cfg.particle_plane_height});
  }
  return field;
}

double Image::abs_sum() const {
  double s = 0.0;
  for (float p : pixels) s += std::abs(p);
  return s;
}

std::vector<Vec3> displaced_positions(const ParticleField& field,
                                      std::span<const PointLoad> loads,
                                      const SensorConfig& cfg) {
  std::vector<Vec3> out = field.positions;
  if (loads.empty()) return out;
  const Material material = Material::from(cfg);
  const double clamp = singular_clamp_distance(cfg);
  const bool anchored = cfg.stiff_layer_depth > 0.0;
  const double anchor_z = cfg.surface_height() - cfg.stiff_layer_depth;
  for (Vec3& p : out) {
    Vec3 u = particle_displacement(loads, p, cfg, material, clamp);
    if (anchored) {
      const Vec3 b = particle_displacement(loads, {p.x, p.y, anchor_z}, cfg, material, clamp);
      u = {u.x - b.x, u.y - b.y, u.z - b.z};
    }
    p.x += u.x;
    p.y += u.y;
    p.z += u.z;
  }
  return out;
}

Image rasterize(std::span<const Vec3> positions, double radius_px, const SensorConfig& cfg,
                std::size_t camera) {
  Image img(cfg.image_size);
  const int n = static_cast<int>(cfg.image_size);
  const double reach = radius_px + 0.5;
  for (const Vec3& p : positions) {
    if (!(p.z > cfg.camera_positions[camera].z)) continue;
    const PixelCoord c = project_unbounded(p, camera, cfg);
    const int u0 = std::max(0, static_cast<int>(std::floor(c.u - reach)));
    const int u1 = std::min(n - 1, static_cast<int>(std::floor(c.u + reach)));
    const int v0 = std::max(0, static_cast<int>(std::floor(c.v - reach)));
    const int v1 = std::min(n - 1, static_cast<int>(std::floor(c.v + reach)));
    for (int v = v0; v <= v1; ++v) {
      const double dv = v + 0.5 - c.v;
      for (int u = u0; u <= u1; ++u) {
        const double du = u + 0.5 - c.u;
        const double coverage = std::clamp(reach - std::hypot(du, dv), 0.0, 1.0);
        if (coverage > 0.0) img.at(u, v) += static_cast<float>(coverage);
      }
    }
  }
  for (float& px : img.pixels) px = std::min(px, 1.0f);
  return img;
}

Image render(const ParticleField& field, const SensorConfig& cfg, std::size_t camera) {
  return rasterize(field.positions, field.radius_px, cfg, camera);
}

Image render(const ParticleField& field, const ForceDistribution& load, const SensorConfig& cfg,
             std::size_t camera) {
  const auto loads = point_loads(load, cfg);
  const auto moved = displaced_positions(field, loads, cfg);
  return rasterize(moved, field.radius_px, cfg, camera);
}

Image render(const ParticleField& field, const Indentation& ind, const SensorConfig& cfg,
             std::size_t camera) {
  return render(field, bin_forces(ind, cfg), cfg, camera);
}

Image difference_image(const Image& current, const Image& rest) {
  if (current.size != rest.size || current.pixels.size() != rest.pixels.size())
    throw ValidationError("difference_image: dimension mismatch");
  Image out(current.size);
  for (std::size_t i = 0; i < out.pixels.size(); ++i)
    out.pixels[i] = current.pixels[i] - rest.pixels[i];
  return out;
}

CaptureRig::CaptureRig(SensorConfig cfg, ParticleField field)
    : cfg_(std::move(cfg)), field_(std::move(field)) {
  cfg_.validate();
  rest_.reserve(cfg_.camera_count());
  for (std::size_t k = 0; k < cfg_.camera_count(); ++k) rest_.push_back(render(field_, cfg_, k));
}

FrameSet CaptureRig::capture(std::uint64_t sample_id) const {
  FrameSet fs;
  fs.sample_id = sample_id;
  fs.timestamp = static_cast<double>(sample_id) / kFrameRate;
  for (std::size_t k = 0; k < cfg_.camera_count(); ++k) fs.frames.emplace_back(cfg_.image_size);
  return fs;
}

FrameSet CaptureRig::capture(const Indentation& ind, std::uint64_t sample_id) const {
  return capture(bin_forces(ind, cfg_), sample_id);
}

FrameSet CaptureRig::capture(const ForceDistribution& load, std::uint64_t sample_id) const {
  const auto loads = point_loads(load, cfg_);
  if (loads.empty()) return capture(sample_id);
  const auto moved = displaced_positions(field_, loads, cfg_);
  FrameSet fs;
  fs.sample_id = sample_id;
  fs.timestamp = static_cast<double>(sample_id) / kFrameRate;
  Rng noise(derive_seed(field_.seed, sample_id + 0x6e6f697365ULL));
  for (std::size_t k = 0; k < cfg_.camera_count(); ++k) {
    Image current = rasterize(moved, field_.radius_px, cfg_, k);
    if (cfg_.noise_sigma > 0.0)
      for (float& px : current.pixels)
        px = std::clamp(static_cast<float>(px + cfg_.noise_sigma * noise.normal()), 0.0f, 1.0f);
    fs.frames.push_back(difference_image(current, rest_[k]));
  }
  return fs;
}

void write_pgm(std::ostream& out, std::span<const float> values, std::size_t width,
               std::size_t height, PgmDepth depth, bool offset_encode) {
  if (values.size() != width * height) throw ValidationError("write_pgm: size mismatch");
  const unsigned maxval = depth == PgmDepth::bits8 ? 255u : 65535u;
  out << "P5\n" << width << ' ' << height << '\n' << maxval << '\n';
  for (float raw : values) {
    double v = offset_encode ? 0.5 + 0.5 * raw : raw;
    v = std::clamp(v, 0.0, 1.0);
    const auto q = static_cast<unsigned>(std::lround(v * maxval));
    if (depth == PgmDepth::bits8) {
      out.put(static_cast<char>(q));
    } else {
      out.put(static_cast<char>((q >> 8) & 0xff));
      out.put(static_cast<char>(q & 0xff));
    }
  }
}

void write_pgm(std::ostream& out, const Image& img, PgmDepth depth, bool offset_encode) {
  write_pgm(out, img.pixels, img.size, img.size, depth, offset_encode);
}

}  // namespace tactile
