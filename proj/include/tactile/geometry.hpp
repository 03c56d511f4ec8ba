#pragma once

// Sensor surface, force-bin discretization, camera layout and projection,
// and the layer-stack thickness calculator.
//
// Frame: x and y run along the two horizontal sides of the surface with the
// origin at a corner; z points from the cameras toward the surface. All
// cameras sit with their pinhole at z = camera_positions[k].z (0 for the
// default layout) looking along +z.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tactile {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct PixelCoord {
  double u = 0.0;  // along +x
  double v = 0.0;  // along +y
};

enum class Projection { pinhole, equidistant_fisheye };

struct BinGrid {
  std::uint32_t nx = 25;
  std::uint32_t ny = 26;
  std::size_t count() const { return std::size_t{nx} * ny; }
  bool operator==(const BinGrid&) const = default;
};

struct SensorConfig {
  double surface_width_x = 49.0;  // mm
  double surface_width_y = 51.0;  // mm
  BinGrid bins;

  std::vector<Vec3> camera_positions;  // mm, pinhole centers
  double particle_plane_height = 6.0;  // mm above the pinhole plane
  double particle_depth = 1.0;         // mm below the surface
  double focal_length = 0.8;           // mm
  double sensor_width = 3.68;          // mm, square image sensor
  std::uint32_t image_size = 128;      // px, square frames
  Projection projection = Projection::pinhole;

  double particle_density = 0.4;    // particles per mm^2
  double particle_radius_px = 2.0;  // px
  double noise_sigma = 0.0;         // Gaussian pixel noise on loaded frames
  // The particle layer rests on a much stiffer layer. Particle motion is
  // rendered relative to the half-space displacement at that interface,
  // stiff_layer_depth below the surface; 0 disables the correction.
  double stiff_layer_depth = 2.5;  // mm

  double effective_modulus = 5.477e5;  // Pa, E* of the gel
  double poisson_ratio = 0.45;
  double traction_coefficient = 0.3;
  double tip_radius = 5.0;  // mm, indenter sphere radius
  double max_depth = 1.5;   // mm
  std::uint32_t quadrature = 16;  // midpoint subsamples per bin side

  std::uint64_t rng_seed = 1;

  std::size_t camera_count() const { return camera_positions.size(); }
  double surface_height() const { return particle_plane_height + particle_depth; }
  double bin_width_x() const { return surface_width_x / bins.nx; }
  double bin_width_y() const { return surface_width_y / bins.ny; }
  double bin_area() const { return bin_width_x() * bin_width_y(); }
  double pixel_pitch() const { return sensor_width / image_size; }
  /// E* in N/mm^2, the unit the contact formulas work in.
  double effective_modulus_mpa() const { return effective_modulus * 1e-6; }
  /// Young's modulus in N/mm^2 recovered from E* and nu.
  double youngs_modulus_mpa() const {
    return effective_modulus_mpa() * (1.0 - poisson_ratio * poisson_ratio);
  }

  /// 128 x 128 frames, 2 px particles.
  static SensorConfig full_scale();
  /// 64 x 64 frames, 1 px particles; the default for training runs.
  static SensorConfig desk_scale();

  /// Throws ValidationError on inconsistent values.
  void validate() const;
};

/// Cameras at the quadrant centers of the surface, pinholes at z = 0.
/// Order: (low x, low y), (high x, low y), (low x, high y), (high x, high y).
std::vector<Vec3> quadrant_cameras(double width_x, double width_y);

// ---- bins ------------------------------------------------------------------

/// Row-major bin id, x fastest. Throws DomainError off the surface.
std::size_t bin_index(Vec2 point, const SensorConfig& cfg);
Vec2 bin_center(std::size_t bin, const SensorConfig& cfg);

// ---- projection ------------------------------------------------------------

/// Image coordinates without the bounds check. Throws DomainError when the
/// point is at or behind the pinhole plane.
PixelCoord project_unbounded(Vec3 point, std::size_t camera, const SensorConfig& cfg);

/// nullopt when the projection falls outside the image_size x image_size grid.
std::optional<PixelCoord> project(Vec3 point, std::size_t camera, const SensorConfig& cfg);

/// Back-projects a pixel onto the plane z = plane_z.
Vec3 unproject(PixelCoord px, std::size_t camera, double plane_z, const SensorConfig& cfg);

bool in_image(PixelCoord px, const SensorConfig& cfg);

// ---- coverage --------------------------------------------------------------

struct FovPolygon {
  std::size_t camera = 0;
  std::vector<Vec2> vertices;  // on the particle plane, counter-clockwise
};

struct CoverageReport {
  std::vector<FovPolygon> polygons;
  double uncovered_fraction = 0.0;
  std::size_t samples_x = 0;
  std::size_t samples_y = 0;
};

/// True when the particle below surface point p is imaged by the camera.
bool camera_sees(std::size_t camera, Vec2 p, const SensorConfig& cfg);

/// Rasterizes the surface at 10x bin resolution. An empty camera list
/// means all cameras.
CoverageReport coverage_report(const SensorConfig& cfg,
                               std::span<const std::size_t> cameras = {});

/// Bins whose center is seen by at least one of the given cameras, ascending.
std::vector<std::uint32_t> covered_bins(const SensorConfig& cfg,
                                        std::span<const std::size_t> cameras = {});

/// CSV rows "camera,vertex,x_mm,y_mm".
std::string coverage_csv(const CoverageReport& report);
std::string coverage_summary(const CoverageReport& report);

// ---- thickness -------------------------------------------------------------

struct DimensioningSpec {
  double silicone_stack_thickness = 0.85;   // particle + protection layers
  double lens_to_particle_distance = 5.1;
  double camera_module_thickness = 7.5;
  double interface_board_thickness = 1.1;
  double connector_thickness = 2.9;
  double image_sensor_width = 0.575;        // ideal-design sensor
  double required_fov_width = 5.0;          // per camera, ideal design
  double commodity_module_thickness = 1.158;
  double commodity_focus_distance = 3.0;
  double commodity_image_distance = 0.3;

  void validate() const;
};

enum class ThicknessVariant { as_built, relocated_connector, relocated_board, ideal_minimal };

std::optional<ThicknessVariant> parse_thickness_variant(std::string_view name);
std::string_view to_string(ThicknessVariant v);

/// Object distance a pinhole camera needs to image fov_width onto a sensor of
/// sensor_width with the given image distance (similar triangles).
double pinhole_object_distance(double fov_width, double sensor_width, double image_distance);

double total_thickness(const DimensioningSpec& spec, ThicknessVariant variant);

}  // namespace tactile
