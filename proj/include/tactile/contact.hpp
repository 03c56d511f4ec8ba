#pragma once

// Analytic ground truth for a spherically-ended indenter pressed into an
// elastic half-space: Hertz surface pressure integrated over the force bins,
// and Boussinesq interior displacements superposed over the bin loads.
//
// Units: mm, N, N/mm^2 (MPa). Forces are the traction exerted on the gel;
// Fz is positive into the gel, i.e. toward the cameras.

#include <cstddef>
#include <span>
#include <vector>

#include "tactile/geometry.hpp"

namespace tactile {

struct Indentation {
  Vec2 center;
  double depth = 0.0;        // mm
  double tip_radius = 5.0;   // mm

  double contact_radius() const;
  /// Throws ValidationError/DomainError when the state is not admissible
  /// for the sensor (negative depth, off-surface center, contact wider than
  /// the cylindrical shank, deeper than cfg.max_depth).
  void validate(const SensorConfig& cfg) const;
};

enum class Axis : std::size_t { x = 0, y = 1, z = 2 };

struct ForceDistribution {
  BinGrid grid;
  std::vector<double> values;  // (Fx, Fy, Fz) per bin, bin-major
  bool truncated = false;      // contact patch crossed the surface boundary

  ForceDistribution() = default;
  explicit ForceDistribution(BinGrid g) : grid(g), values(3 * g.count(), 0.0) {}

  std::size_t bin_count() const { return grid.count(); }
  double& at(std::size_t bin, Axis a) { return values[3 * bin + static_cast<std::size_t>(a)]; }
  double at(std::size_t bin, Axis a) const { return values[3 * bin + static_cast<std::size_t>(a)]; }
  double total(Axis a) const;

  ForceDistribution& operator+=(const ForceDistribution& other);
};

/// P = 4/3 E* sqrt(R) d^(3/2), E* in N/mm^2.
double hertz_load(const Indentation& ind, double e_star_mpa);

/// p(r) = p0 sqrt(1 - r^2/a^2) inside the contact, 0 outside; N/mm^2.
double hertz_pressure(const Indentation& ind, double e_star_mpa, double r);

/// Midpoint quadrature of the Hertz pressure (Fz) and the slope-scaled
/// radial traction (Fx, Fy) over every bin.
ForceDistribution bin_forces(const Indentation& ind, const SensorConfig& cfg);

// ---- interior displacement ---------------------------------------------

struct PointLoad {
  Vec2 at;
  double force = 0.0;  // N, normal, into the gel
};

/// Bins with non-zero Fz as point loads at the bin centers.
std::vector<PointLoad> point_loads(const ForceDistribution& f, const SensorConfig& cfg);

struct Material {
  double youngs_mpa = 0.0;
  double poisson = 0.0;

  static Material from(const SensorConfig& cfg) {
    return {cfg.youngs_modulus_mpa(), cfg.poisson_ratio};
  }
};

/// Boussinesq displacement at lateral offset r and depth z below a unit
/// normal point load on the surface. Returns {u_r, u_z} with u_r positive
/// away from the load and u_z positive into the material.
struct RadialDisplacement {
  double radial = 0.0;
  double vertical = 0.0;
};
RadialDisplacement boussinesq_unit(double r, double z, const Material& m);

struct DisplacementDiagnostics {
  std::size_t clamped = 0;  // evaluations inside the singular-distance clamp
};

/// Superposed displacement (sensor frame, mm) of a particle at the given
/// position. The particle must lie below the surface plane. Distances closer
/// than min_distance to a load are clamped to it.
Vec3 particle_displacement(std::span<const PointLoad> loads, Vec3 particle,
                           const SensorConfig& cfg, const Material& material,
                           double min_distance, DisplacementDiagnostics* diag = nullptr);

/// Convenience overloads using the config's material and a half-bin clamp.
Vec3 particle_displacement(const ForceDistribution& f, Vec3 particle, const SensorConfig& cfg,
                           DisplacementDiagnostics* diag = nullptr);
Vec3 particle_displacement(const Indentation& ind, Vec3 particle, const SensorConfig& cfg,
                           DisplacementDiagnostics* diag = nullptr);

double singular_clamp_distance(const SensorConfig& cfg);

}  // namespace tactile
