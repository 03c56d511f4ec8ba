#pragma once

// Particle pattern rendering and difference images.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "tactile/contact.hpp"
#include "tactile/geometry.hpp"

namespace tactile {

struct ParticleField {
  std::vector<Vec3> positions;       // mm, on the particle plane
  double radius_px = 1.0;
  double physical_diameter_mm = 0.165;  // metadata only
  std::uint64_t seed = 0;

  /// Uniform positions over the surface at cfg.particle_density.
  static ParticleField generate(const SensorConfig& cfg, std::uint64_t seed);
};

/// Square single-channel float image, row-major (v rows, u columns).
struct Image {
  std::uint32_t size = 0;
  std::vector<float> pixels;

  Image() = default;
  explicit Image(std::uint32_t n) : size(n), pixels(std::size_t{n} * n, 0.0f) {}

  float& at(std::size_t u, std::size_t v) { return pixels[v * size + u]; }
  float at(std::size_t u, std::size_t v) const { return pixels[v * size + u]; }
  double abs_sum() const;
};

struct FrameSet {
  std::vector<Image> frames;  // one difference image per camera
  std::uint64_t sample_id = 0;
  double timestamp = 0.0;     // s, sample_id / frame rate
};

/// Particle positions after applying the superposed displacement field.
std::vector<Vec3> displaced_positions(const ParticleField& field,
                                      std::span<const PointLoad> loads,
                                      const SensorConfig& cfg);

/// Anti-aliased discs at the projected positions; overlaps saturate at 1.
Image rasterize(std::span<const Vec3> positions, double radius_px, const SensorConfig& cfg,
                std::size_t camera);

/// Rest-state frame.
Image render(const ParticleField& field, const SensorConfig& cfg, std::size_t camera);
/// Frame under a load.
Image render(const ParticleField& field, const ForceDistribution& load, const SensorConfig& cfg,
             std::size_t camera);
Image render(const ParticleField& field, const Indentation& ind, const SensorConfig& cfg,
             std::size_t camera);

/// current - rest, pixel-wise. Throws ValidationError on size mismatch.
Image difference_image(const Image& current, const Image& rest);

/// Holds the rest frames of one (field, config) pair and produces difference
/// FrameSets. Rest frames are rendered once in the constructor; capture() is
/// const and safe to call concurrently.
class CaptureRig {
 public:
  CaptureRig(SensorConfig cfg, ParticleField field);

  const SensorConfig& config() const { return cfg_; }
  const ParticleField& field() const { return field_; }
  const std::vector<Image>& rest_frames() const { return rest_; }

  /// No indentation: identically zero difference images.
  FrameSet capture(std::uint64_t sample_id = 0) const;
  FrameSet capture(const Indentation& ind, std::uint64_t sample_id = 0) const;
  FrameSet capture(const ForceDistribution& load, std::uint64_t sample_id = 0) const;

 private:
  SensorConfig cfg_;
  ParticleField field_;
  std::vector<Image> rest_;
};

constexpr double kFrameRate = 40.0;

enum class PgmDepth { bits8, bits16 };

/// Writes a binary PGM. Values are clamped to [0, 1] after the optional
/// offset encoding 0.5 + v/2 used for signed (difference) images.
void write_pgm(std::ostream& out, std::span<const float> values, std::size_t width,
               std::size_t height, PgmDepth depth, bool offset_encode);
void write_pgm(std::ostream& out, const Image& img, PgmDepth depth, bool offset_encode);

}  // namespace tactile
