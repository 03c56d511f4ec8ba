#include "tactile/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "tactile/errors.hpp"

namespace tactile {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

std::vector<std::size_t> resolve_cameras(const SensorConfig& cfg,
                                         std::span<const std::size_t> cameras) {
  std::vector<std::size_t> out;
  if (cameras.empty()) {
    for (std::size_t k = 0; k < cfg.camera_count(); ++k) out.push_back(k);
    return out;
  }
  for (std::size_t k : cameras) {
    require(k < cfg.camera_count(), "camera id out of range: " + std::to_string(k));
    out.push_back(k);
  }
  return out;
}

}  // namespace

std::vector<Vec3> quadrant_cameras(double width_x, double width_y) {
  const double x0 = 0.25 * width_x;
  const double x1 = 0.75 * width_x;
  const double y0 = 0.25 * width_y;
  const double y1 = 0.75 * width_y;
  return {{x0, y0, 0.0}, {x1, y0, 0.0}, {x0, y1, 0.0}, {x1, y1, 0.0}};
}

SensorConfig SensorConfig::full_scale() {
  SensorConfig cfg;
  cfg.camera_positions = quadrant_cameras(cfg.surface_width_x, cfg.surface_width_y);
  return cfg;
}

SensorConfig SensorConfig::desk_scale() {
  SensorConfig cfg = full_scale();
  cfg.image_size = 64;
  cfg.particle_radius_px = 1.0;
  return cfg;
}

void SensorConfig::validate() const {
  require(surface_width_x > 0.0 && surface_width_y > 0.0, "surface widths must be positive");
  require(bins.nx > 0 && bins.ny > 0, "bin grid must be non-empty");
  require(!camera_positions.empty(), "at least one camera is required");
  require(particle_plane_height > 0.0, "particle_plane_height must be positive");
  require(particle_depth > 0.0, "particle_depth must be positive");
  require(focal_length > 0.0, "focal_length must be positive");
  require(sensor_width > 0.0, "sensor_width must be positive");
  require(image_size >= 8 && image_size % 16 == 0, "image_size must be a positive multiple of 16");
  require(particle_density >= 0.0, "particle_density must be non-negative");
  require(particle_radius_px > 0.0, "particle_radius_px must be positive");
  require(noise_sigma >= 0.0, "noise_sigma must be non-negative");
  require(effective_modulus > 0.0, "effective_modulus must be positive");
  require(poisson_ratio > -1.0 && poisson_ratio < 0.5, "poisson_ratio must lie in (-1, 0.5)");
  require(traction_coefficient >= 0.0, "traction_coefficient must be non-negative");
  require(tip_radius > 0.0, "tip_radius must be positive");
  require(max_depth > 0.0, "max_depth must be positive");
  require(quadrature >= 8, "quadrature must be at least 8 subsamples per bin side");
  for (const Vec3& c : camera_positions)
    require(c.z < particle_plane_height, "cameras must sit below the particle plane");
}

// ---- bins ------------------------------------------------------------------

std::size_t bin_index(Vec2 p, const SensorConfig& cfg) {
  if (!(p.x >= 0.0 && p.x <= cfg.surface_width_x && p.y >= 0.0 && p.y <= cfg.surface_width_y))
    throw DomainError("point outside the sensor surface");
  const auto ix = std::min<std::size_t>(
      static_cast<std::size_t>(p.x / cfg.bin_width_x()), cfg.bins.nx - 1);
  const auto iy = std::min<std::size_t>(
      static_cast<std::size_t>(p.y / cfg.bin_width_y()), cfg.bins.ny - 1);
  return ix + std::size_t{cfg.bins.nx} * iy;
}

Vec2 bin_center(std::size_t bin, const SensorConfig& cfg) {
  if (bin >= cfg.bins.count()) throw DomainError("bin id out of range");
  const std::size_t ix = bin % cfg.bins.nx;
  const std::size_t iy = bin / cfg.bins.nx;
  return {(static_cast<double>(ix) + 0.5) * cfg.bin_width_x(),
          (static_cast<double>(iy) + 0.5) * cfg.bin_width_y()};
}

// ---- projection ------------------------------------------------------------

PixelCoord project_unbounded(Vec3 p, std::size_t camera, const SensorConfig& cfg) {
  if (camera >= cfg.camera_count()) throw ValidationError("camera id out of range");
  const Vec3& c = cfg.camera_positions[camera];
  const double dx = p.x - c.x;
  const double dy = p.y - c.y;
  const double dz = p.z - c.z;
  if (!(dz > 0.0)) throw DomainError("point at or behind the pinhole plane");

  double sx = 0.0;  // offset on the image sensor, mm
  double sy = 0.0;
  if (cfg.projection == Projection::pinhole) {
    sx = cfg.focal_length * dx / dz;
    sy = cfg.focal_length * dy / dz;
  } else {
    const double lateral = std::hypot(dx, dy);
    if (lateral > 0.0) {
      const double r = cfg.focal_length * std::atan2(lateral, dz);
      sx = r * dx / lateral;
      sy = r * dy / lateral;
    }
  }
  const double half = 0.5 * cfg.image_size;
  const double pitch = cfg.pixel_pitch();
  return {half + sx / pitch, half + sy / pitch};
}

bool in_image(PixelCoord px, const SensorConfig& cfg) {
  const double n = cfg.image_size;
  return px.u >= 0.0 && px.u < n && px.v >= 0.0 && px.v < n;
}

std::optional<PixelCoord> project(Vec3 p, std::size_t camera, const SensorConfig& cfg) {
  const PixelCoord px = project_unbounded(p, camera, cfg);
  if (!in_image(px, cfg)) return std::nullopt;
  return px;
}

Vec3 unproject(PixelCoord px, std::size_t camera, double plane_z, const SensorConfig& cfg) {
  if (camera >= cfg.camera_count()) throw ValidationError("camera id out of range");
  const Vec3& c = cfg.camera_positions[camera];
  const double dz = plane_z - c.z;
  if (!(dz > 0.0)) throw DomainError("plane at or behind the pinhole plane");
  const double half = 0.5 * cfg.image_size;
  const double sx = (px.u - half) * cfg.pixel_pitch();
  const double sy = (px.v - half) * cfg.pixel_pitch();
  double dx = 0.0;
  double dy = 0.0;
  if (cfg.projection == Projection::pinhole) {
    dx = sx * dz / cfg.focal_length;
    dy = sy * dz / cfg.focal_length;
  } else {
    const double r = std::hypot(sx, sy);
    if (r > 0.0) {
      const double theta = r / cfg.focal_length;
      if (theta >= 0.5 * std::numbers::pi) throw DomainError("ray does not reach the plane");
      const double lateral = dz * std::tan(theta);
      dx = lateral * sx / r;
      dy = lateral * sy / r;
    }
  }
  return {c.x + dx, c.y + dy, plane_z};
}

// ---- coverage --------------------------------------------------------------

bool camera_sees(std::size_t camera, Vec2 p, const SensorConfig& cfg) {
  return project({p.x, p.y, cfg.particle_plane_height}, camera, cfg).has_value();
}

CoverageReport coverage_report(const SensorConfig& cfg, std::span<const std::size_t> cameras) {
  const auto ids = resolve_cameras(cfg, cameras);
  CoverageReport report;

  constexpr int kEdgeSamples = 8;
  const double n = cfg.image_size;
  for (std::size_t k : ids) {
    FovPolygon poly;
    poly.camera = k;
    const PixelCoord corners[4] = {{0, 0}, {n, 0}, {n, n}, {0, n}};
    for (int e = 0; e < 4; ++e) {
      const PixelCoord a = corners[e];
      const PixelCoord b = corners[(e + 1) % 4];
      for (int s = 0; s < kEdgeSamples; ++s) {
        const double t = static_cast<double>(s) / kEdgeSamples;
        const PixelCoord px{a.u + t * (b.u - a.u), a.v + t * (b.v - a.v)};
        try {
          const Vec3 q = unproject(px, k, cfg.particle_plane_height, cfg);
          poly.vertices.push_back({q.x, q.y});
        } catch (const DomainError&) {
          // fisheye corners beyond 90 degrees never reach the plane
        }
      }
    }
    report.polygons.push_back(std::move(poly));
  }

  report.samples_x = std::size_t{cfg.bins.nx} * 10;
  report.samples_y = std::size_t{cfg.bins.ny} * 10;
  std::size_t uncovered = 0;
  for (std::size_t j = 0; j < report.samples_y; ++j) {
    for (std::size_t i = 0; i < report.samples_x; ++i) {
      const Vec2 p{(static_cast<double>(i) + 0.5) * cfg.surface_width_x / report.samples_x,
                   (static_cast<double>(j) + 0.5) * cfg.surface_width_y / report.samples_y};
      const bool seen = std::any_of(ids.begin(), ids.end(),
                                    [&](std::size_t k) { return camera_sees(k, p, cfg); });
      if (!seen) ++uncovered;
    }
  }
  report.uncovered_fraction =
      static_cast<double>(uncovered) / static_cast<double>(report.samples_x * report.samples_y);
  return report;
}

std::vector<std::uint32_t> covered_bins(const SensorConfig& cfg,
                                        std::span<const std::size_t> cameras) {
  const auto ids = resolve_cameras(cfg, cameras);
  std::vector<std::uint32_t> bins;
  for (std::size_t b = 0; b < cfg.bins.count(); ++b) {
    const Vec2 c = bin_center(b, cfg);
    if (std::any_of(ids.begin(), ids.end(), [&](std::size_t k) { return camera_sees(k, c, cfg); }))
      bins.push_back(static_cast<std::uint32_t>(b));
  }
  return bins;
}

std::string coverage_csv(const CoverageReport& report) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "camera,vertex,x_mm,y_mm\n";
  for (const auto& poly : report.polygons)
    for (std::size_t i = 0; i < poly.vertices.size(); ++i)
      out << poly.camera << ',' << i << ',' << poly.vertices[i].x << ',' << poly.vertices[i].y
          << '\n';
  return out.str();
}

std::string coverage_summary(const CoverageReport& report) {
  std::ostringstream out;
  out << std::setprecision(6) << "coverage cameras=" << report.polygons.size()
      << " samples=" << report.samples_x << 'x' << report.samples_y
      << " uncovered_fraction=" << report.uncovered_fraction;
  return out.str();
}

// ---- thickness -------------------------------------------------------------

void DimensioningSpec::validate() const {
  const double values[] = {silicone_stack_thickness,   lens_to_particle_distance,
                           camera_module_thickness,    interface_board_thickness,
                           connector_thickness,        image_sensor_width,
                           required_fov_width,         commodity_module_thickness,
                           commodity_focus_distance,   commodity_image_distance};
  for (double v : values)
    require(v > 0.0 && std::isfinite(v), "dimensioning lengths must be strictly positive");
}

std::optional<ThicknessVariant> parse_thickness_variant(std::string_view name) {
  if (name == "as-built") return ThicknessVariant::as_built;
  if (name == "relocated-connector") return ThicknessVariant::relocated_connector;
  if (name == "relocated-board") return ThicknessVariant::relocated_board;
  if (name == "ideal-minimal") return ThicknessVariant::ideal_minimal;
  return std::nullopt;
}

std::string_view to_string(ThicknessVariant v) {
  switch (v) {
    case ThicknessVariant::as_built: return "as-built";
    case ThicknessVariant::relocated_connector: return "relocated-connector";
    case ThicknessVariant::relocated_board: return "relocated-board";
    case ThicknessVariant::ideal_minimal: return "ideal-minimal";
  }
  return "?";
}

double pinhole_object_distance(double fov_width, double sensor_width, double image_distance) {
  require(fov_width > 0.0 && sensor_width > 0.0 && image_distance > 0.0,
          "pinhole lengths must be positive");
  return fov_width * image_distance / sensor_width;
}

double total_thickness(const DimensioningSpec& spec, ThicknessVariant variant) {
  spec.validate();
  // The LED board sits around the lenses and adds nothing.
  const double optics = spec.silicone_stack_thickness + spec.lens_to_particle_distance +
                        spec.camera_module_thickness;
  const double relocated_board = optics;
  const double relocated_connector = optics + spec.interface_board_thickness;
  const double as_built = relocated_connector + spec.connector_thickness;

  double result = 0.0;
  switch (variant) {
    case ThicknessVariant::as_built: result = as_built; break;
    case ThicknessVariant::relocated_connector: result = relocated_connector; break;
    case ThicknessVariant::relocated_board: result = relocated_board; break;
    case ThicknessVariant::ideal_minimal: {
      const double distance =
          std::max(spec.commodity_focus_distance,
                   pinhole_object_distance(spec.required_fov_width, spec.image_sensor_width,
                                           spec.commodity_image_distance));
      const double ideal =
          spec.silicone_stack_thickness + spec.commodity_module_thickness + distance;
      // a lower bound never exceeds the board-free build
      result = std::min(ideal, relocated_board);
      break;
    }
  }
  if (!(result >= 0.0)) throw ValidationError("negative total thickness");
  return result;
}

}  // namespace tactile
