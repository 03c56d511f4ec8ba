#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tactile/contact.hpp"
#include "tactile/errors.hpp"
#include "tactile/rng.hpp"

using namespace tactile;

namespace {

// Brute-force polar integration of the Hertz pressure, independent of the
// bin quadrature.
double polar_load(const Indentation& ind, double e_star) {
  const double a = ind.contact_radius();
  const double P = 4.0 / 3.0 * e_star * std::sqrt(ind.tip_radius) * std::pow(ind.depth, 1.5);
  const double p0 = 3.0 * P / (2.0 * std::numbers::pi * a * a);
  const int n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = (i + 0.5) * a / n;
    sum += p0 * std::sqrt(1.0 - r * r / (a * a)) * 2.0 * std::numbers::pi * r * (a / n);
  }
  return sum;
}

// Johnson's point-load form written with the shear modulus.
Vec3 boussinesq_reference(double P, double dx, double dy, double z, double E, double nu) {
  const double G = E / (2.0 * (1.0 + nu));
  const double r = std::hypot(dx, dy);
  const double rho = std::sqrt(r * r + z * z);
  const double uz = P / (4.0 * std::numbers::pi * G) * (z * z / (rho * rho * rho) + 2.0 * (1.0 - nu) / rho);
  const double ur = P / (4.0 * std::numbers::pi * G) * (r * z / (rho * rho * rho) - (1.0 - 2.0 * nu) / (rho + z) * r / rho);
  if (r == 0.0) return {0.0, 0.0, -uz};
  return {ur * dx / r, ur * dy / r, -uz};
}

double sum_axis(const ForceDistribution& f, Axis a) { return f.total(a); }

}  // namespace

TEST_SUITE("contact-mechanics") {

TEST_CASE("hertz: zero depth, contact radius and the 3 N load") {
  const SensorConfig cfg = SensorConfig::full_scale();
  const double e = cfg.effective_modulus_mpa();
  Indentation zero{{24.5, 25.5}, 0.0, 5.0};
  for (double r : {0.0, 0.5, 2.0}) CHECK(hertz_pressure(zero, e, r) == 0.0);

  Indentation ind{{24.5, 25.5}, 1.5, 5.0};
  CHECK(ind.contact_radius() == doctest::Approx(std::sqrt(7.5)));
  CHECK(ind.contact_radius() == doctest::Approx(2.739).epsilon(1e-3));
  CHECK(hertz_load(ind, e) == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(hertz_pressure(ind, e, 3.0) == 0.0);
  CHECK(polar_load(ind, e) == doctest::Approx(hertz_load(ind, e)).epsilon(1e-6));
}

TEST_CASE("bin_forces: zero depth is exactly zero") {
  const SensorConfig cfg = SensorConfig::full_scale();
  const ForceDistribution f = bin_forces({{24.5, 25.5}, 0.0, 5.0}, cfg);
  for (double v : f.values) CHECK(v == 0.0);
  CHECK_FALSE(f.truncated);
}

TEST_CASE("bin_forces: centered 1.5 mm indentation sums to the analytic load") {
  const SensorConfig cfg = SensorConfig::full_scale();
  const Indentation ind{{24.5, 25.5}, 1.5, 5.0};
  const ForceDistribution f = bin_forces(ind, cfg);
  const double fz = sum_axis(f, Axis::z);
  CHECK(std::abs(fz - polar_load(ind, cfg.effective_modulus_mpa())) < 0.01 * fz);
  CHECK(std::abs(fz - 3.0) < 0.03);
  CHECK(std::abs(sum_axis(f, Axis::x)) < 1e-6 * fz);
  CHECK(std::abs(sum_axis(f, Axis::y)) < 1e-6 * fz);
  for (std::size_t b = 0; b < f.bin_count(); ++b) CHECK(f.at(b, Axis::z) >= 0.0);
}

TEST_CASE("bin_forces: load conservation for random in-surface patches") {
  const SensorConfig cfg = SensorConfig::full_scale();
  Rng rng(21);
  for (int i = 0; i < 20; ++i) {
    const double d = rng.uniform(0.8, 1.5);
    const double R = rng.uniform(8.0, 20.0);  // patches of at least three bins
    Indentation ind{{0, 0}, d, R};
    const double a = ind.contact_radius();
    ind.center = {rng.uniform(a + 0.1, 49.0 - a - 0.1), rng.uniform(a + 0.1, 51.0 - a - 0.1)};
    SensorConfig c = cfg;
    c.max_depth = 2.0;
    const ForceDistribution f = bin_forces(ind, c);
    CHECK_FALSE(f.truncated);
    const double P = hertz_load(ind, c.effective_modulus_mpa());
    CHECK(std::abs(f.total(Axis::z) - P) < 0.01 * P);
  }
}

TEST_CASE("bin_forces: total Fz strictly increases with depth") {
  const SensorConfig cfg = SensorConfig::full_scale();
  double last = 0.0;
  for (double d = 0.1; d <= 1.5 + 1e-9; d += 0.1) {
    const double fz = bin_forces({{20.0, 30.0}, d, 5.0}, cfg).total(Axis::z);
    CHECK(fz > last);
    last = fz;
  }
}

TEST_CASE("bin_forces: mirroring about the midline permutes bins and flips the mirrored shear") {
  const SensorConfig cfg = SensorConfig::full_scale();
  const Indentation ind{{13.3, 17.9}, 1.2, 5.0};
  const Indentation mx{{49.0 - 13.3, 17.9}, 1.2, 5.0};
  const ForceDistribution a = bin_forces(ind, cfg);
  const ForceDistribution b = bin_forces(mx, cfg);
  double peak = 0.0;
  for (double v : a.values) peak = std::max(peak, std::abs(v));
  for (std::size_t iy = 0; iy < cfg.bins.ny; ++iy) {
    for (std::size_t ix = 0; ix < cfg.bins.nx; ++ix) {
      const std::size_t s = ix + 25 * iy, t = (24 - ix) + 25 * iy;
      CHECK(std::abs(a.at(s, Axis::z) - b.at(t, Axis::z)) <= 1e-9 * peak);
      CHECK(std::abs(a.at(s, Axis::x) + b.at(t, Axis::x)) <= 1e-9 * peak);
      CHECK(std::abs(a.at(s, Axis::y) - b.at(t, Axis::y)) <= 1e-9 * peak);
    }
  }
}

TEST_CASE("bin_forces: truncated patches are flagged, invalid indentations rejected") {
  const SensorConfig cfg = SensorConfig::full_scale();
  const ForceDistribution f = bin_forces({{1.0, 25.0}, 1.5, 5.0}, cfg);
  CHECK(f.truncated);
  CHECK(f.total(Axis::z) < hertz_load({{1.0, 25.0}, 1.5, 5.0}, cfg.effective_modulus_mpa()));
  CHECK_THROWS_AS(bin_forces({{60.0, 25.0}, 1.0, 5.0}, cfg), DomainError);
  CHECK_THROWS_AS(bin_forces({{20.0, 25.0}, -0.1, 5.0}, cfg), ValidationError);
  CHECK_THROWS_AS(bin_forces({{20.0, 25.0}, 1.6, 5.0}, cfg), ValidationError);
}

TEST_CASE("boussinesq: unit load matches the shear-modulus form") {
  const SensorConfig cfg = SensorConfig::full_scale();
  const Material m = Material::from(cfg);
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const double dx = rng.uniform(-10, 10), dy = rng.uniform(-10, 10), z = rng.uniform(0.2, 5.0);
    const PointLoad load{{20.0, 20.0}, 1.0};
    const Vec3 p{20.0 + dx, 20.0 + dy, cfg.surface_height() - z};
    const Vec3 u = particle_displacement(std::span(&load, 1), p, cfg, m, 0.0);
    const Vec3 ref = boussinesq_reference(1.0, dx, dy, z, m.youngs_mpa, m.poisson);
    CHECK(u.x == doctest::Approx(ref.x).epsilon(1e-10));
    CHECK(u.y == doctest::Approx(ref.y).epsilon(1e-10));
    CHECK(u.z == doctest::Approx(ref.z).epsilon(1e-10));
  }
  // directly beneath: no lateral motion
  const RadialDisplacement d = boussinesq_unit(0.0, 1.0, m);
  CHECK(d.radial == 0.0);
  CHECK(d.vertical > 0.0);
}

TEST_CASE("particle displacement: zero load, linearity and the singular clamp") {
  const SensorConfig cfg = SensorConfig::full_scale();
  const Vec3 p{20.3, 25.1, cfg.particle_plane_height};
  const ForceDistribution none(cfg.bins);
  const Vec3 u0 = particle_displacement(none, p, cfg);
  CHECK(u0.x == 0.0);
  CHECK(u0.y == 0.0);
  CHECK(u0.z == 0.0);

  const ForceDistribution f = bin_forces({{21.0, 24.0}, 1.0, 5.0}, cfg);
  ForceDistribution f2 = f;
  for (double& v : f2.values) v *= 2.0;
  const Vec3 a = particle_displacement(f, p, cfg);
  const Vec3 b = particle_displacement(f2, p, cfg);
  CHECK(b.x == doctest::Approx(2.0 * a.x).epsilon(1e-12));
  CHECK(b.y == doctest::Approx(2.0 * a.y).epsilon(1e-12));
  CHECK(b.z == doctest::Approx(2.0 * a.z).epsilon(1e-12));

  DisplacementDiagnostics diag;
  const PointLoad load{{20.0, 20.0}, 1.0};
  const Vec3 near{20.0, 20.0, cfg.surface_height() - 0.1};
  const Vec3 u = particle_displacement(std::span(&load, 1), near, cfg, Material::from(cfg),
                                       singular_clamp_distance(cfg), &diag);
  CHECK(diag.clamped == 1);
  CHECK(std::isfinite(u.z));
  CHECK_THROWS_AS(particle_displacement(f, Vec3{20, 20, cfg.surface_height() + 0.1}, cfg), DomainError);
}

TEST_CASE("particle displacement magnitude does not grow away from the contact") {
  const SensorConfig cfg = SensorConfig::full_scale();
  const Indentation ind{{24.5, 25.5}, 1.5, 5.0};
  const ForceDistribution f = bin_forces(ind, cfg);
  const double a = ind.contact_radius();
  for (double angle : {0.0, 0.7, 1.9, 3.3, 5.1}) {
    double last = 1e300;
    for (double r = a; r < 20.0; r += 0.5) {
      const Vec3 p{24.5 + r * std::cos(angle), 25.5 + r * std::sin(angle), cfg.particle_plane_height};
      const Vec3 u = particle_displacement(f, p, cfg);
      const double mag = std::sqrt(u.x * u.x + u.y * u.y + u.z * u.z);
      CHECK(mag <= last * (1.0 + 1e-9));
      last = mag;
    }
  }
}

}  // TEST_SUITE
