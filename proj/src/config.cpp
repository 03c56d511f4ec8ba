#include "tactile/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace tactile {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || s.empty())
    throw ValidationError("expected a number, got '" + std::string(s) + "'");
  return v;
}

std::uint64_t to_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || s.empty())
    throw ValidationError("expected a non-negative integer, got '" + std::string(s) + "'");
  return v;
}

std::uint32_t to_u32(std::string_view s) {
  const std::uint64_t v = to_u64(s);
  if (v > 0xffffffffu) throw ValidationError("integer out of range: " + std::string(s));
  return static_cast<std::uint32_t>(v);
}

bool to_bool(std::string_view s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ValidationError("expected true or false, got '" + std::string(s) + "'");
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Entry {
  std::string_view key;
  std::function<void(Config&, std::string_view)> set;
  std::function<std::string(const Config&)> get;
};

template <typename M>
Entry real(std::string_view key, M m) {
  return {key, [m](Config& c, std::string_view v) { m(c) = to_double(v); },
          [m](const Config& c) { return num(m(const_cast<Config&>(c))); }};
}

template <typename M>
Entry u32(std::string_view key, M m) {
  return {key, [m](Config& c, std::string_view v) { m(c) = to_u32(v); },
          [m](const Config& c) { return std::to_string(m(const_cast<Config&>(c))); }};
}

template <typename M>
Entry size(std::string_view key, M m) {
  return {key, [m](Config& c, std::string_view v) { m(c) = static_cast<std::size_t>(to_u64(v)); },
          [m](const Config& c) { return std::to_string(m(const_cast<Config&>(c))); }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    // sensor
    t.push_back(real("surface_width_x", [](Config& c) -> double& { return c.sensor.surface_width_x; }));
    t.push_back(real("surface_width_y", [](Config& c) -> double& { return c.sensor.surface_width_y; }));
    t.push_back(u32("bins_x", [](Config& c) -> std::uint32_t& { return c.sensor.bins.nx; }));
    t.push_back(u32("bins_y", [](Config& c) -> std::uint32_t& { return c.sensor.bins.ny; }));
    t.push_back({"camera_positions",
                 [](Config& c, std::string_view v) {
                   std::vector<Vec3> cams;
                   for (auto item : split(v, ';')) {
                     if (item.empty()) continue;
                     std::vector<double> xyz;
                     std::istringstream in{std::string(item)};
                     std::string tok;
                     while (in >> tok) xyz.push_back(to_double(tok));
                     if (xyz.size() != 3)
                       throw ValidationError("camera position needs x y z, got '" + std::string(item) + "'");
                     cams.push_back({xyz[0], xyz[1], xyz[2]});
                   }
                   c.sensor.camera_positions = std::move(cams);
                 },
                 [](const Config& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.sensor.camera_positions.size(); ++i) {
                     const Vec3& p = c.sensor.camera_positions[i];
                     if (i) s += "; ";
                     s += num(p.x) + " " + num(p.y) + " " + num(p.z);
                   }
                   return s;
                 }});
    t.push_back(real("particle_plane_height", [](Config& c) -> double& { return c.sensor.particle_plane_height; }));
    t.push_back(real("particle_depth", [](Config& c) -> double& { return c.sensor.particle_depth; }));
    t.push_back(real("focal_length", [](Config& c) -> double& { return c.sensor.focal_length; }));
    t.push_back(real("sensor_width", [](Config& c) -> double& { return c.sensor.sensor_width; }));
    t.push_back(u32("image_size", [](Config& c) -> std::uint32_t& { return c.sensor.image_size; }));
    t.push_back({"projection",
                 [](Config& c, std::string_view v) {
                   if (v == "pinhole") c.sensor.projection = Projection::pinhole;
                   else if (v == "equidistant_fisheye") c.sensor.projection = Projection::equidistant_fisheye;
                   else throw ValidationError("unknown projection '" + std::string(v) + "'");
                 },
                 [](const Config& c) {
                   return std::string(c.sensor.projection == Projection::pinhole ? "pinhole" : "equidistant_fisheye");
                 }});
    t.push_back(real("particle_density", [](Config& c) -> double& { return c.sensor.particle_density; }));
    t.push_back(real("particle_radius_px", [](Config& c) -> double& { return c.sensor.particle_radius_px; }));
    t.push_back(real("noise_sigma", [](Config& c) -> double& { return c.sensor.noise_sigma; }));
    t.push_back(real("stiff_layer_depth", [](Config& c) -> double& { return c.sensor.stiff_layer_depth; }));
    t.push_back(real("effective_modulus", [](Config& c) -> double& { return c.sensor.effective_modulus; }));
    t.push_back(real("poisson_ratio", [](Config& c) -> double& { return c.sensor.poisson_ratio; }));
    t.push_back(real("traction_coefficient", [](Config& c) -> double& { return c.sensor.traction_coefficient; }));
    t.push_back(real("tip_radius", [](Config& c) -> double& { return c.sensor.tip_radius; }));
    t.push_back(real("max_depth", [](Config& c) -> double& { return c.sensor.max_depth; }));
    t.push_back(u32("quadrature", [](Config& c) -> std::uint32_t& { return c.sensor.quadrature; }));
    t.push_back({"rng_seed", [](Config& c, std::string_view v) { c.sensor.rng_seed = to_u64(v); },
                 [](const Config& c) { return std::to_string(c.sensor.rng_seed); }});
    // dimensioning
    t.push_back(real("silicone_stack_thickness", [](Config& c) -> double& { return c.dimensioning.silicone_stack_thickness; }));
    t.push_back(real("lens_to_particle_distance", [](Config& c) -> double& { return c.dimensioning.lens_to_particle_distance; }));
    t.push_back(real("camera_module_thickness", [](Config& c) -> double& { return c.dimensioning.camera_module_thickness; }));
    t.push_back(real("interface_board_thickness", [](Config& c) -> double& { return c.dimensioning.interface_board_thickness; }));
    t.push_back(real("connector_thickness", [](Config& c) -> double& { return c.dimensioning.connector_thickness; }));
    t.push_back(real("image_sensor_width", [](Config& c) -> double& { return c.dimensioning.image_sensor_width; }));
    t.push_back(real("required_fov_width", [](Config& c) -> double& { return c.dimensioning.required_fov_width; }));
    t.push_back(real("commodity_module_thickness", [](Config& c) -> double& { return c.dimensioning.commodity_module_thickness; }));
    t.push_back(real("commodity_focus_distance", [](Config& c) -> double& { return c.dimensioning.commodity_focus_distance; }));
    t.push_back(real("commodity_image_distance", [](Config& c) -> double& { return c.dimensioning.commodity_image_distance; }));
    // indentation grid
    t.push_back(u32("indent_nx", [](Config& c) -> std::uint32_t& { return c.grid.nx; }));
    t.push_back(u32("indent_ny", [](Config& c) -> std::uint32_t& { return c.grid.ny; }));
    t.push_back({"indent_depths",
                 [](Config& c, std::string_view v) {
                   std::vector<double> d;
                   for (auto item : split(v, ',')) d.push_back(to_double(item));
                   c.grid.depths = std::move(d);
                 },
                 [](const Config& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.grid.depths.size(); ++i) s += (i ? ", " : "") + num(c.grid.depths[i]);
                   return s;
                 }});
    t.push_back(real("indent_margin", [](Config& c) -> double& { return c.grid.margin; }));
    // training
    t.push_back(size("batch_size", [](Config& c) -> std::size_t& { return c.train.batch_size; }));
    t.push_back(real("learning_rate", [](Config& c) -> double& { return c.train.learning_rate; }));
    t.push_back(size("patience", [](Config& c) -> std::size_t& { return c.train.patience; }));
    t.push_back(size("max_epochs", [](Config& c) -> std::size_t& { return c.train.max_epochs; }));
    t.push_back(real("data_fraction", [](Config& c) -> double& { return c.train.data_fraction; }));
    t.push_back({"rmse_loss", [](Config& c, std::string_view v) { c.train.rmse_loss = to_bool(v); },
                 [](const Config& c) { return std::string(c.train.rmse_loss ? "true" : "false"); }});
    t.push_back({"normalize_labels", [](Config& c, std::string_view v) { c.train.normalize_labels = to_bool(v); },
                 [](const Config& c) { return std::string(c.train.normalize_labels ? "true" : "false"); }});
    t.push_back({"seed",
                 [](Config& c, std::string_view v) {
                   c.seed = to_u64(v);
                   c.train.seed = c.seed;
                 },
                 [](const Config& c) { return std::to_string(c.seed); }});
    return t;
  }();
  return table;
}

}  // namespace

void Config::validate() const {
  sensor.validate();
  dimensioning.validate();
  grid.validate(sensor);
  train.validate();
}

Config parse_config(std::string_view text) {
  Config cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ValidationError(where + "expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto& table = entries();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Entry& e) { return e.key == key; });
    if (it == table.end()) throw ValidationError(where + "unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second)
      throw ValidationError(where + "duplicate key '" + std::string(key) + "'");
    try {
      it->set(cfg, value);
    } catch (const ValidationError& e) {
      throw ValidationError(where + std::string(key) + ": " + e.what());
    }
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const Config& cfg) {
  std::string out;
  for (const auto& e : entries()) out += std::string(e.key) + " = " + e.get(cfg) + "\n";
  return out;
}

std::uint64_t config_hash(const Config& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : to_text(cfg)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& e : entries()) out.emplace_back(e.key);
  return out;
}

}  // namespace tactile
