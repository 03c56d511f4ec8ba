#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "tactile/config.hpp"
#include "tactile/nn/model_io.hpp"
#include "tactile/parallel.hpp"
#include "tactile/train/recalibrate.hpp"

namespace tactile::cli {
namespace fs = std::filesystem;
using train::fmt;

namespace {

struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = 0;
  std::string out = "out";
};

struct Manifest {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

class Context {
 public:
  explicit Context(const Globals& g) : g_(g) {
    cfg_ = g.config_path.empty() ? Config{} : load_config(g.config_path);
    if (g.seed_set) {
      cfg_.seed = g.seed;
      cfg_.train.seed = g.seed;
    }
    cfg_.validate();
    set_thread_count(g.threads);
  }

  Config& config() { return cfg_; }

  fs::path out_dir() const {
    std::error_code ec;
    fs::create_directories(g_.out, ec);
    if (ec || !fs::is_directory(g_.out)) throw ValidationError("cannot create output directory " + g_.out);
    return g_.out;
  }

  fs::path output(const std::string& name) {
    const fs::path p = out_dir() / name;
    manifest_.outputs.push_back(p.string());
    return p;
  }
  void input(const std::string& path) { manifest_.inputs.push_back(path); }

  void write_text(const fs::path& p, const std::string& text) const {
    std::ofstream f(p, std::ios::binary);
    f << text;
    if (!f) throw ValidationError("cannot write " + p.string());
  }

  void finish(const std::string& subcommand) {
    const fs::path p = out_dir() / "manifest.txt";
    std::string m;
    m += "subcommand = " + subcommand + "\n";
    m += "config = " + (g_.config_path.empty() ? std::string("(defaults)") : g_.config_path) + "\n";
    m += "seed = " + std::to_string(cfg_.seed) + "\n";
    m += "inputs = " + join(manifest_.inputs) + "\n";
    m += "outputs = " + join(manifest_.outputs) + "\n";
    m += "timestamp = " + utc_now() + "\n";
    m += "tool_version = " + std::string(kToolVersion) + "\n";
    m += "config_hash = " + hex(config_hash(cfg_)) + "\n";
    write_text(p, m);
  }

 private:
  Globals g_;
  Config cfg_;
  Manifest manifest_;
};

// Grid of one force component, ny rows of nx values, row 0 at y = 0.
std::string grid_csv(const ForceDistribution& f, Axis a) {
  std::string s;
  for (std::size_t j = 0; j < f.grid.ny; ++j) {
    for (std::size_t i = 0; i < f.grid.nx; ++i) s += (i ? "," : "") + fmt(f.at(j * f.grid.nx + i, a));
    s += "\n";
  }
  return s;
}

// Offset-encoded heatmap scaled by the largest magnitude of the component.
void grid_pgm(const fs::path& p, const ForceDistribution& f, Axis a) {
  double peak = 0.0;
  for (std::size_t b = 0; b < f.bin_count(); ++b) peak = std::max(peak, std::abs(f.at(b, a)));
  std::vector<float> v(f.bin_count());
  for (std::size_t b = 0; b < v.size(); ++b) v[b] = peak > 0.0 ? static_cast<float>(f.at(b, a) / peak) : 0.0f;
  std::ofstream out(p, std::ios::binary);
  write_pgm(out, v, f.grid.nx, f.grid.ny, PgmDepth::bits8, true);
  if (!out) throw ValidationError("cannot write " + p.string());
}

train::Dataset read_dataset(Context& ctx, const std::string& path) {
  ctx.input(path);
  return train::load_dataset(path);
}

nn::Network<float> read_model(Context& ctx, const std::string& path) {
  ctx.input(path);
  return nn::load_model(path);
}

// ---- subcommands -----------------------------------------------------------

int cmd_generate(Context& ctx, std::ostream& out) {
  const Config& c = ctx.config();
  const train::Dataset data = train::generate_dataset(c.sensor, c.grid, c.seed, config_hash(c));
  const fs::path p = ctx.output("dataset.tds");
  train::save_dataset(p.string(), data);
  ctx.finish("generate");
  out << "samples " << data.samples.size() << " train " << data.count(train::Split::train) << " val "
      << data.count(train::Split::val) << " test " << data.count(train::Split::test) << " max_total_fz "
      << fmt(data.max_total_force()) << " | " << coverage_summary(coverage_report(c.sensor)) << "\n";
  return 0;
}

struct TrainFlags {
  std::optional<std::size_t> max_epochs, batch_size, patience;
  std::optional<double> learning_rate, fraction;
  bool rmse_loss = false;

  void add(CLI::App* app) {
    app->add_option("--max-epochs", max_epochs, "epoch limit");
    app->add_option("--batch-size", batch_size, "mini-batch size");
    app->add_option("--patience", patience, "early-stopping patience in epochs");
    app->add_option("--learning-rate", learning_rate, "Adam step size");
    app->add_option("--fraction", fraction, "fraction of the train split to use");
    app->add_flag("--rmse-loss", rmse_loss, "minimize RMSE instead of MSE");
  }
  train::TrainOptions apply(train::TrainOptions t) const {
    if (max_epochs) t.max_epochs = *max_epochs;
    if (batch_size) t.batch_size = *batch_size;
    if (patience) t.patience = *patience;
    if (learning_rate) t.learning_rate = *learning_rate;
    if (fraction) t.data_fraction = *fraction;
    if (rmse_loss) t.rmse_loss = true;
    t.validate();
    return t;
  }
};

struct TrainArgs {
  std::string dataset;
  std::vector<std::size_t> cameras;
  TrainFlags flags;
};

int cmd_train(Context& ctx, const TrainArgs& a, std::ostream& out) {
  const Config& c = ctx.config();
  train::Dataset data = read_dataset(ctx, a.dataset);
  nn::Architecture arch = nn::Architecture::for_sensor(c.sensor);
  if (!a.cameras.empty()) {
    data = train::restrict_to_cameras(data, a.cameras);
    arch.camera_count = static_cast<std::uint32_t>(a.cameras.size());
    arch.output_bins = covered_bins(c.sensor, a.cameras);
  }
  train::check_compatible(arch, data);
  const train::TrainOptions opt = a.flags.apply(c.train);
  nn::Network<float> model(arch, c.seed);
  const train::TrainReport rep = train::train(model, data, opt);
  nn::save_model(ctx.output("model.tnm").string(), model);
  ctx.write_text(ctx.output("report.csv"), train::report_csv(rep));
  ctx.finish("train");
  out << train::summary_line(rep.test) << "\n";
  return 0;
}

struct RecalArgs {
  std::string model, dataset;
  std::vector<double> fractions{0.1, 0.25, 0.5, 0.75, 1.0};
  std::size_t seeds = 3;
  std::vector<std::size_t> camera_map;
  bool fresh_last_fc = false;
  TrainFlags flags;
};

int cmd_recalibrate(Context& ctx, const RecalArgs& a, std::ostream& out, std::ostream& err) {
  const Config& c = ctx.config();
  const nn::Network<float> old_model = read_model(ctx, a.model);
  const train::Dataset data = read_dataset(ctx, a.dataset);
  const std::vector<std::uint32_t> bins = covered_bins(c.sensor);
  if (a.seeds == 0) throw ValidationError("need at least one seed");

  std::string csv = "fraction,seed,train_samples,epochs_run,rmse_dist_xy,rmse_total_xy,rmse_dist_z,rmse_total_z\n";
  std::vector<double> xs;
  std::vector<double> ys[4];
  bool all_frozen = true;
  for (double f : a.fractions) {
    for (std::size_t s = 0; s < a.seeds; ++s) {
      train::RecalibrationOptions ro;
      ro.train = a.flags.apply(c.train);
      ro.train.data_fraction = f;
      ro.train.seed = c.seed + s;
      ro.fresh_last_fc = a.fresh_last_fc;
      ro.camera_map = a.camera_map;
      ro.init_seed = derive_seed(c.seed + s, 0x7265);
      ro.train.validate();
      const auto res = train::recalibrate(old_model, data, bins, ro);
      all_frozen = all_frozen && res.frozen_identical;
      const auto m = train::four_metrics(res.report.test);
      csv += fmt(f) + "," + std::to_string(ro.train.seed) + "," + std::to_string(res.report.train_samples) + "," +
             std::to_string(res.report.epochs_run);
      for (std::size_t k = 0; k < 4; ++k) {
        csv += "," + fmt(m[k]);
        ys[k].push_back(m[k]);
      }
      csv += "\n";
      xs.push_back(f);
      char name[64];
      std::snprintf(name, sizeof name, "model_f%g_s%llu.tnm", f, static_cast<unsigned long long>(ro.train.seed));
      nn::save_model(ctx.output(name).string(), res.model);
      err << "fraction " << fmt(f) << " seed " << ro.train.seed << " wall " << fmt(res.report.wall_seconds) << " s\n";
    }
  }
  static const char* names[] = {"rmse_dist_xy", "rmse_total_xy", "rmse_dist_z", "rmse_total_z"};
  if (xs.size() >= 2 && a.fractions.size() >= 2) {
    for (std::size_t k = 0; k < 4; ++k) {
      const auto line = train::fit_line(xs, ys[k]);
      csv += std::string("# trend ") + names[k] + " intercept " + fmt(line.intercept) + " slope " + fmt(line.slope) + "\n";
    }
  }
  ctx.write_text(ctx.output("recalibration.csv"), csv);
  ctx.finish("recalibrate");
  out << "rows " << xs.size() << " frozen_identical " << (all_frozen ? "true" : "false") << "\n";
  return all_frozen ? 0 : 3;
}

struct PredictArgs {
  std::string model;
  std::optional<double> x, y, depth, tip_radius;
  std::string dataset;
  std::optional<std::uint64_t> sample;
};

int cmd_predict(Context& ctx, const PredictArgs& a, std::ostream& out) {
  const Config& c = ctx.config();
  nn::Network<float> model = read_model(ctx, a.model);
  const nn::Architecture& arch = model.architecture();
  if (arch.grid != c.sensor.bins) throw ValidationError("model bin grid differs from the configured sensor");

  FrameSet frames;
  std::optional<ForceDistribution> truth;
  if (a.sample) {
    if (a.dataset.empty()) throw ValidationError("--sample needs --dataset");
    const train::Dataset data = read_dataset(ctx, a.dataset);
    const auto it = std::find_if(data.samples.begin(), data.samples.end(),
                                 [&](const train::Sample& s) { return s.id == *a.sample; });
    if (it == data.samples.end()) throw ValidationError("no sample with id " + std::to_string(*a.sample));
    frames.frames = it->frames;
    truth = it->label;
  } else {
    if (!a.x || !a.y || !a.depth) throw ValidationError("predict needs --x --y --depth or --dataset --sample");
    Indentation ind{{*a.x, *a.y}, *a.depth, a.tip_radius.value_or(c.sensor.tip_radius)};
    ind.validate(c.sensor);
    SensorConfig sensor = c.sensor;
    const CaptureRig rig(sensor, ParticleField::generate(sensor, sensor.rng_seed));
    frames = rig.capture(ind);
    truth = bin_forces(ind, sensor);
  }

  // Unchanged frames mean an undeformed surface, so no force is reported.
  bool any = false;
  for (const Image& img : frames.frames)
    for (float v : img.pixels) any = any || v != 0.0f;
  const ForceDistribution pred = any ? nn::predict(model, frames) : ForceDistribution(arch.grid);

  const char* axes = "xyz";
  for (std::size_t k = 0; k < 3; ++k) {
    const Axis ax = static_cast<Axis>(k);
    ctx.write_text(ctx.output(std::string("F") + axes[k] + ".csv"), grid_csv(pred, ax));
    grid_pgm(ctx.output(std::string("F") + axes[k] + ".pgm"), pred, ax);
  }
  ctx.finish("predict");

  std::size_t peak = 0;
  for (std::size_t b = 1; b < pred.bin_count(); ++b)
    if (pred.at(b, Axis::z) > pred.at(peak, Axis::z)) peak = b;
  out << "total " << fmt(pred.total(Axis::x)) << " " << fmt(pred.total(Axis::y)) << " " << fmt(pred.total(Axis::z))
      << " | peak_fz_bin " << peak % arch.grid.nx << " " << peak / arch.grid.nx;
  if (truth) {
    const ForceDistribution one[] = {pred};
    const ForceDistribution ref[] = {*truth};
    const auto m = train::compute_metrics(one, ref, arch.output_bins);
    out << " | " << train::summary_line(m);
  }
  out << "\n";
  return 0;
}

int cmd_dimension(Context& ctx, const std::string& variant, std::ostream& out) {
  const DimensioningSpec& spec = ctx.config().dimensioning;
  std::vector<ThicknessVariant> which;
  if (variant == "all") {
    which = {ThicknessVariant::as_built, ThicknessVariant::relocated_connector, ThicknessVariant::relocated_board,
             ThicknessVariant::ideal_minimal};
  } else {
    const auto v = parse_thickness_variant(variant);
    if (!v) throw ValidationError("unknown variant '" + variant + "'");
    which = {*v};
  }
  std::string report;
  for (auto v : which) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s %.2f mm\n", std::string(to_string(v)).c_str(), total_thickness(spec, v));
    report += buf;
  }
  ctx.write_text(ctx.output("thickness.txt"), report);
  ctx.finish("dimension");
  out << report;
  return 0;
}

int cmd_coverage(Context& ctx, const std::vector<std::size_t>& cameras, std::ostream& out) {
  const SensorConfig& s = ctx.config().sensor;
  const CoverageReport rep = coverage_report(s, cameras);
  ctx.write_text(ctx.output("coverage.csv"), coverage_csv(rep));
  ctx.finish("coverage");
  out << coverage_summary(rep) << " covered_bins " << covered_bins(s, cameras).size() << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-camera tactile sensor simulator and force-distribution trainer"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "key = value config file");
  auto* seed_opt = app.add_option("--seed", g.seed, "overrides the config seed");
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
  app.add_option("--out", g.out, "output directory");

  auto* gen = app.add_subcommand("generate", "render the indentation-grid dataset");

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "train a model on a dataset");
  tr->add_option("--dataset", ta.dataset, "TDS1 file")->required();
  tr->add_option("--cameras", ta.cameras, "train on this camera subset")->delimiter(',');
  ta.flags.add(tr);

  RecalArgs ra;
  auto* rc = app.add_subcommand("recalibrate", "extend a model to the full camera set");
  rc->add_option("--model", ra.model, "TNM1 model trained on a camera subset")->required();
  rc->add_option("--dataset", ra.dataset, "TDS1 file with every camera")->required();
  rc->add_option("--fractions", ra.fractions, "train-split fractions")->delimiter(',');
  rc->add_option("--seeds", ra.seeds, "runs per fraction");
  rc->add_option("--camera-map", ra.camera_map, "new index of each old camera")->delimiter(',');
  rc->add_flag("--fresh-last-fc", ra.fresh_last_fc, "re-initialize the last FC layer");
  ra.flags.add(rc);

  PredictArgs pa;
  auto* pr = app.add_subcommand("predict", "predict a force distribution");
  pr->add_option("--model", pa.model, "TNM1 model")->required();
  pr->add_option("--x", pa.x, "indentation center x, mm");
  pr->add_option("--y", pa.y, "indentation center y, mm");
  pr->add_option("--depth", pa.depth, "indentation depth, mm");
  pr->add_option("--tip-radius", pa.tip_radius, "indenter radius, mm");
  pr->add_option("--dataset", pa.dataset, "TDS1 file for --sample");
  pr->add_option("--sample", pa.sample, "sample id in --dataset");

  std::string variant = "all";
  auto* dm = app.add_subcommand("dimension", "sensor thickness for a layer-stack variant");
  dm->add_option("--variant", variant, "as-built, relocated-connector, relocated-board, ideal-minimal or all");

  std::vector<std::size_t> cov_cams;
  auto* cv = app.add_subcommand("coverage", "camera field-of-view coverage");
  cv->add_option("--cameras", cov_cams, "camera subset")->delimiter(',');

  for (auto* sub : {gen, tr, rc, pr, dm, cv}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  g.seed_set = seed_opt->count() > 0;

  try {
    Context ctx(g);
    if (*gen) return cmd_generate(ctx, out);
    if (*tr) return cmd_train(ctx, ta, out);
    if (*rc) return cmd_recalibrate(ctx, ra, out, err);
    if (*pr) return cmd_predict(ctx, pa, out);
    if (*dm) return cmd_dimension(ctx, variant, out);
    if (*cv) return cmd_coverage(ctx, cov_cams, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace tactile::cli
