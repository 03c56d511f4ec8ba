#include "tactile/contact.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tactile/errors.hpp"

namespace tactile {

double Indentation::contact_radius() const { return std::sqrt(tip_radius * std::max(depth, 0.0)); }

void Indentation::validate(const SensorConfig& cfg) const {
  if (!(depth >= 0.0)) throw ValidationError("indentation depth must be non-negative");
  if (depth > cfg.max_depth + 1e-12) throw ValidationError("indentation deeper than max_depth");
  if (!(tip_radius > 0.0)) throw ValidationError("tip radius must be positive");
  if (contact_radius() > tip_radius)
    throw ValidationError("contact radius exceeds the indenter shank radius");
  if (!(center.x >= 0.0 && center.x <= cfg.surface_width_x && center.y >= 0.0 &&
        center.y <= cfg.surface_width_y))
    throw DomainError("indentation center outside the sensor surface");
}

double ForceDistribution::total(Axis a) const {
  double sum = 0.0;
  for (std::size_t b = 0; b < bin_count(); ++b) sum += at(b, a);
  return sum;
}

ForceDistribution& ForceDistribution::operator+=(const ForceDistribution& other) {
  if (other.values.size() != values.size()) throw ValidationError("force grids differ");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
  truncated = truncated || other.truncated;
  return *this;
}

double hertz_load(const Indentation& ind, double e_star_mpa) {
  if (ind.depth <= 0.0) return 0.0;
  return 4.0 / 3.0 * e_star_mpa * std::sqrt(ind.tip_radius) * std::pow(ind.depth, 1.5);
}

double hertz_pressure(const Indentation& ind, double e_star_mpa, double r) {
  if (ind.depth <= 0.0) return 0.0;
  const double a = ind.contact_radius();
  if (r >= a) return 0.0;
  const double p0 = 3.0 * hertz_load(ind, e_star_mpa) / (2.0 * std::numbers::pi * a * a);
  return p0 * std::sqrt(1.0 - (r * r) / (a * a));
}

ForceDistribution bin_forces(const Indentation& ind, const SensorConfig& cfg) {
  ind.validate(cfg);
  ForceDistribution out(cfg.bins);
  if (ind.depth == 0.0) return out;

  const double a = ind.contact_radius();
  const double e_star = cfg.effective_modulus_mpa();
  const double R = ind.tip_radius;
  const double bw_x = cfg.bin_width_x();
  const double bw_y = cfg.bin_width_y();
  const std::size_t q = cfg.quadrature;
  const double dA = bw_x * bw_y / static_cast<double>(q * q);
  const double ct = cfg.traction_coefficient;

  out.truncated = ind.center.x - a < 0.0 || ind.center.x + a > cfg.surface_width_x ||
                  ind.center.y - a < 0.0 || ind.center.y + a > cfg.surface_width_y;

  const auto clamp_ix = [&](double x) {
    return static_cast<std::size_t>(std::clamp(std::floor(x / bw_x), 0.0, cfg.bins.nx - 1.0));
  };
  const auto clamp_iy = [&](double y) {
    return static_cast<std::size_t>(std::clamp(std::floor(y / bw_y), 0.0, cfg.bins.ny - 1.0));
  };
  const std::size_t ix0 = clamp_ix(ind.center.x - a);
  const std::size_t ix1 = clamp_ix(ind.center.x + a);
  const std::size_t iy0 = clamp_iy(ind.center.y - a);
  const std::size_t iy1 = clamp_iy(ind.center.y + a);

  for (std::size_t iy = iy0; iy <= iy1; ++iy) {
    for (std::size_t ix = ix0; ix <= ix1; ++ix) {
      double fx = 0.0;
      double fy = 0.0;
      double fz = 0.0;
      for (std::size_t sy = 0; sy < q; ++sy) {
        const double y = (static_cast<double>(iy) + (sy + 0.5) / q) * bw_y;
        const double dy = y - ind.center.y;
        for (std::size_t sx = 0; sx < q; ++sx) {
          const double x = (static_cast<double>(ix) + (sx + 0.5) / q) * bw_x;
          const double dx = x - ind.center.x;
          const double r = std::hypot(dx, dy);
          if (r >= a) continue;
          const double p = hertz_pressure(ind, e_star, r);
          fz += p;
          if (r > 0.0) {
            // Horizontal share of the pressure acting normal to the sphere.
            const double slope = r / std::sqrt(R * R - r * r);
            const double t = ct * p * slope / r;
            fx += t * dx;
            fy += t * dy;
          }
        }
      }
      const std::size_t bin = ix + std::size_t{cfg.bins.nx} * iy;
      out.at(bin, Axis::x) = fx * dA;
      out.at(bin, Axis::y) = fy * dA;
      out.at(bin, Axis::z) = fz * dA;
    }
  }
  return out;
}

std::vector<PointLoad> point_loads(const ForceDistribution& f, const SensorConfig& cfg) {
  std::vector<PointLoad> loads;
  for (std::size_t b = 0; b < f.bin_count(); ++b) {
    const double fz = f.at(b, Axis::z);
    if (fz != 0.0) loads.push_back({bin_center(b, cfg), fz});
  }
  return loads;
}

RadialDisplacement boussinesq_unit(double r, double z, const Material& m) {
  const double rho = std::hypot(r, z);
  const double nu = m.poisson;
  const double scale = (1.0 + nu) / (2.0 * std::numbers::pi * m.youngs_mpa * rho);
  return {scale * (r * z / (rho * rho) - (1.0 - 2.0 * nu) * r / (rho + z)),
          scale * (2.0 * (1.0 - nu) + z * z / (rho * rho))};
}

double singular_clamp_distance(const SensorConfig& cfg) {
  return 0.5 * std::min(cfg.bin_width_x(), cfg.bin_width_y());
}

Vec3 particle_displacement(std::span<const PointLoad> loads, Vec3 particle,
                           const SensorConfig& cfg, const Material& material,
                           double min_distance, DisplacementDiagnostics* diag) {
  const double depth = cfg.surface_height() - particle.z;
  if (!(depth > 0.0)) throw DomainError("particle is not below the surface");
  Vec3 u;
  for (const PointLoad& load : loads) {
    const double dx = particle.x - load.at.x;
    const double dy = particle.y - load.at.y;
    double r = std::hypot(dx, dy);
    double z = depth;
    const double rho = std::hypot(r, z);
    if (rho < min_distance) {
      const double s = min_distance / rho;
      r *= s;
      z *= s;
      if (diag != nullptr) ++diag->clamped;
    }
    const RadialDisplacement d = boussinesq_unit(r, z, material);
    const double lateral = std::hypot(dx, dy);
    if (lateral > 0.0) {
      u.x += load.force * d.radial * dx / lateral;
      u.y += load.force * d.radial * dy / lateral;
    }
    // into the gel is toward the cameras, i.e. -z in the sensor frame
    u.z -= load.force * d.vertical;
  }
  return u;
}

Vec3 particle_displacement(const ForceDistribution& f, Vec3 particle, const SensorConfig& cfg,
                           DisplacementDiagnostics* diag) {
  const auto loads = point_loads(f, cfg);
  return particle_displacement(loads, particle, cfg, Material::from(cfg),
                               singular_clamp_distance(cfg), diag);
}

Vec3 particle_displacement(const Indentation& ind, Vec3 particle, const SensorConfig& cfg,
                           DisplacementDiagnostics* diag) {
  return particle_displacement(bin_forces(ind, cfg), particle, cfg, diag);
}

}  // namespace tactile
