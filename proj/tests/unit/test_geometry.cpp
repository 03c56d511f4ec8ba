#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tactile/errors.hpp"
#include "tactile/geometry.hpp"
#include "tactile/rng.hpp"

using namespace tactile;

TEST_SUITE("sensor-geometry") {

TEST_CASE("bin_index: corners and the surface center") {
  const SensorConfig cfg = SensorConfig::full_scale();
  CHECK(cfg.bins.count() == 650);
  CHECK(bin_index({0.0, 0.0}, cfg) == 0);
  CHECK(bin_index({49.0 - 1e-9, 51.0 - 1e-9}, cfg) == 649);
  CHECK(bin_index({49.0, 51.0}, cfg) == 649);
  // cell (12, 13), x fastest
  CHECK(bin_index({24.5, 25.5}, cfg) == 12 + 25 * 13);
  CHECK_THROWS_AS(bin_index({-0.1, 3.0}, cfg), DomainError);
  CHECK_THROWS_AS(bin_index({3.0, 51.1}, cfg), DomainError);
}

TEST_CASE("bins partition the surface into equal areas") {
  const SensorConfig cfg = SensorConfig::full_scale();
  const double area = cfg.surface_width_x * cfg.surface_width_y / 650.0;
  CHECK(std::abs(cfg.bin_area() - area) <= 1e-9 * area);
  for (std::size_t b = 0; b < cfg.bins.count(); ++b) CHECK(bin_index(bin_center(b, cfg), cfg) == b);

  Rng rng(3);
  for (int i = 0; i < 20000; ++i) {
    const Vec2 p{rng.uniform(0.0, 49.0), rng.uniform(0.0, 51.0)};
    const std::size_t b = bin_index(p, cfg);
    const Vec2 c = bin_center(b, cfg);
    CHECK(std::abs(p.x - c.x) <= 0.5 * cfg.bin_width_x() + 1e-12);
    CHECK(std::abs(p.y - c.y) <= 0.5 * cfg.bin_width_y() + 1e-12);
  }
}

TEST_CASE("projection: optical axis hits the image center") {
  for (auto proj : {Projection::pinhole, Projection::equidistant_fisheye}) {
    SensorConfig cfg = SensorConfig::full_scale();
    cfg.projection = proj;
    for (std::size_t k = 0; k < cfg.camera_count(); ++k) {
      const Vec3 c = cfg.camera_positions[k];
      const auto px = project({c.x, c.y, cfg.particle_plane_height}, k, cfg);
      REQUIRE(px.has_value());
      CHECK(px->u == doctest::Approx(cfg.image_size / 2.0));
      CHECK(px->v == doctest::Approx(cfg.image_size / 2.0));
    }
  }
}

TEST_CASE("pinhole similar triangles: f = 2, plane at 4, offset 1 gives 0.5 mm on the sensor") {
  SensorConfig cfg = SensorConfig::full_scale();
  cfg.camera_positions = {{10.0, 10.0, 0.0}};
  cfg.focal_length = 2.0;
  cfg.sensor_width = 4.0;
  cfg.image_size = 128;
  const auto px = project({11.0, 10.0, 4.0}, 0, cfg);
  REQUIRE(px.has_value());
  const double expected_px = 0.5 / (4.0 / 128.0);
  CHECK(px->u - 64.0 == doctest::Approx(expected_px));
  CHECK(px->v == doctest::Approx(64.0));
}

TEST_CASE("projection domain: points at or behind the pinhole plane are rejected") {
  const SensorConfig cfg = SensorConfig::full_scale();
  CHECK_THROWS_AS(project({10.0, 10.0, 0.0}, 0, cfg), DomainError);
  CHECK_THROWS_AS(project({10.0, 10.0, -1.0}, 0, cfg), DomainError);
  CHECK_FALSE(project({48.0, 50.0, cfg.particle_plane_height}, 0, cfg).has_value());
}

TEST_CASE("fisheye at theta = 0 has zero radial offset and matches pinhole for small angles") {
  SensorConfig pin = SensorConfig::full_scale();
  SensorConfig fish = pin;
  fish.projection = Projection::equidistant_fisheye;
  const Vec3 c = pin.camera_positions[0];
  const double h = pin.particle_plane_height;
  for (double theta : {0.001, 0.01, 0.03, 0.049}) {
    const double off = h * std::tan(theta);
    const auto a = project_unbounded({c.x + off, c.y, h}, 0, pin);
    const auto b = project_unbounded({c.x + off, c.y, h}, 0, fish);
    const double ra = a.u - pin.image_size / 2.0, rb = b.u - pin.image_size / 2.0;
    CHECK(std::abs(ra - rb) < 1e-3 * std::abs(ra));
  }
}

TEST_CASE("unproject inverts project on the particle plane") {
  for (auto proj : {Projection::pinhole, Projection::equidistant_fisheye}) {
    SensorConfig cfg = SensorConfig::full_scale();
    cfg.projection = proj;
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
      const std::size_t k = rng.below(cfg.camera_count());
      const Vec3 p{rng.uniform(0.0, 49.0), rng.uniform(0.0, 51.0), cfg.particle_plane_height};
      const auto px = project(p, k, cfg);
      if (!px) continue;
      const Vec3 q = unproject(*px, k, cfg.particle_plane_height, cfg);
      CHECK(std::abs(q.x - p.x) < 1e-6);
      CHECK(std::abs(q.y - p.y) < 1e-6);
    }
  }
}

TEST_CASE("coverage: default covers everything, one camera less leaves about a quarter") {
  const SensorConfig cfg = SensorConfig::full_scale();
  CHECK(coverage_report(cfg).uncovered_fraction == 0.0);
  CHECK(covered_bins(cfg).size() == 650);

  const std::size_t three[] = {0, 1, 2};
  const double f3 = coverage_report(cfg, three).uncovered_fraction;
  CHECK(f3 > 0.15);
  CHECK(f3 <= 0.25 + 1e-12);
  CHECK(covered_bins(cfg, three).size() < 650);
}

TEST_CASE("coverage: a centered camera seeing half of each side covers a quarter") {
  SensorConfig cfg = SensorConfig::full_scale();
  // square FOV of sensor_width * h / f = 25 mm on a 50 mm square surface
  cfg.surface_width_x = 50.0;
  cfg.surface_width_y = 50.0;
  cfg.camera_positions = {{25.0, 25.0, 0.0}};
  cfg.focal_length = cfg.sensor_width * cfg.particle_plane_height / 25.0;
  const double f = coverage_report(cfg).uncovered_fraction;
  CHECK(f == doctest::Approx(0.75).epsilon(0.01));
}

TEST_CASE("coverage CSV lists polygon vertices per camera") {
  const SensorConfig cfg = SensorConfig::desk_scale();
  const auto rep = coverage_report(cfg);
  CHECK(rep.polygons.size() == 4);
  const std::string csv = coverage_csv(rep);
  CHECK(csv.rfind("camera,vertex,x_mm,y_mm\n", 0) == 0);
  CHECK(coverage_summary(rep).find("uncovered_fraction=0") != std::string::npos);
}

TEST_CASE("thickness variants reproduce the as-built stack arithmetic") {
  const DimensioningSpec spec;
  CHECK(total_thickness(spec, ThicknessVariant::as_built) == doctest::Approx(17.45).epsilon(1e-9));
  CHECK(total_thickness(spec, ThicknessVariant::relocated_connector) == doctest::Approx(14.55).epsilon(1e-9));
  CHECK(total_thickness(spec, ThicknessVariant::relocated_board) == doctest::Approx(13.45).epsilon(1e-9));
  const double ideal = total_thickness(spec, ThicknessVariant::ideal_minimal);
  CHECK(ideal == doctest::Approx(0.85 + 1.158 + 3.0));
  CHECK(std::abs(ideal - 5.0) < 0.1);
}

TEST_CASE("thickness ordering holds for random valid specs") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    DimensioningSpec s;
    s.silicone_stack_thickness = rng.uniform(0.1, 3.0);
    s.lens_to_particle_distance = rng.uniform(0.5, 10.0);
    s.camera_module_thickness = rng.uniform(0.5, 10.0);
    s.interface_board_thickness = rng.uniform(0.1, 3.0);
    s.connector_thickness = rng.uniform(0.1, 5.0);
    s.image_sensor_width = rng.uniform(0.1, 5.0);
    s.required_fov_width = rng.uniform(0.5, 20.0);
    s.commodity_module_thickness = rng.uniform(0.1, 5.0);
    s.commodity_focus_distance = rng.uniform(0.1, 10.0);
    s.commodity_image_distance = rng.uniform(0.05, 2.0);
    const double a = total_thickness(s, ThicknessVariant::as_built);
    const double c = total_thickness(s, ThicknessVariant::relocated_connector);
    const double b = total_thickness(s, ThicknessVariant::relocated_board);
    const double m = total_thickness(s, ThicknessVariant::ideal_minimal);
    CHECK(m <= b);
    CHECK(b <= c);
    CHECK(c <= a);
  }
}

TEST_CASE("thickness: invalid specs and variant names") {
  DimensioningSpec s;
  s.connector_thickness = -1.0;
  CHECK_THROWS_AS(total_thickness(s, ThicknessVariant::as_built), ValidationError);
  CHECK(parse_thickness_variant("relocated-board") == ThicknessVariant::relocated_board);
  CHECK_FALSE(parse_thickness_variant("thin").has_value());
  CHECK(pinhole_object_distance(5.0, 0.5, 0.3) == doctest::Approx(3.0));
}

TEST_CASE("config validation rejects inconsistent sensors") {
  SensorConfig cfg = SensorConfig::desk_scale();
  CHECK_NOTHROW(cfg.validate());
  cfg.camera_positions.clear();
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = SensorConfig::desk_scale();
  cfg.poisson_ratio = 0.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = SensorConfig::desk_scale();
  cfg.image_size = 60;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

}  // TEST_SUITE
