#include "tactile/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "tactile/nn/adam.hpp"
#include "tactile/parallel.hpp"
#include "tactile/rng.hpp"

namespace tactile::train {

using nn::Mode;
using nn::Network;
using nn::Tensor;

void TrainOptions::validate() const {
  if (batch_size == 0) throw ValidationError("batch size must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (!(data_fraction > 0.0 && data_fraction <= 1.0)) throw ValidationError("data fraction must lie in (0, 1]");
}

void check_compatible(const nn::Architecture& arch, const Dataset& data) {
  if (arch.camera_count != data.camera_count)
    throw ValidationError("model expects " + std::to_string(arch.camera_count) + " cameras, dataset has " +
                          std::to_string(data.camera_count));
  if (arch.image_size != data.image_size) throw ValidationError("model and dataset image sizes differ");
  if (!(arch.grid == data.grid)) throw ValidationError("model and dataset bin grids differ");
}

namespace {

// Inputs for a set of samples, either raw frames or cached activations
// after the frozen prefix of the network.
class Feeder {
 public:
  Feeder(Network<float>& model, const Dataset& data, std::size_t boundary, std::span<const std::size_t> cache_for)
      : model_(model), data_(data), boundary_(boundary) {
    if (boundary_ == 0) return;
    cache_.resize(data.samples.size());
    const std::size_t chunk = 32;
    std::vector<std::size_t> todo(cache_for.begin(), cache_for.end());
    for (std::size_t b = 0; b < todo.size(); b += chunk) {
      const std::size_t e = std::min(todo.size(), b + chunk);
      std::span<const std::size_t> idx(todo.data() + b, e - b);
      const Tensor<float> act = model_.prefix(frames(idx), boundary_, Mode::eval);
      tail_.assign(act.shape.begin() + 1, act.shape.end());
      const std::size_t per = act.size() / idx.size();
      for (std::size_t i = 0; i < idx.size(); ++i)
        cache_[idx[i]].assign(act.ptr() + i * per, act.ptr() + (i + 1) * per);
    }
  }

  Tensor<float> frames(std::span<const std::size_t> idx) const {
    const std::size_t cams = data_.camera_count, px = std::size_t{data_.image_size} * data_.image_size;
    Tensor<float> t({idx.size(), cams, data_.image_size, data_.image_size});
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t k = 0; k < cams; ++k) {
        const auto& p = data_.samples[idx[i]].frames[k].pixels;
        std::copy(p.begin(), p.end(), t.ptr() + (i * cams + k) * px);
      }
    return t;
  }

  Tensor<float> forward(std::span<const std::size_t> idx, Mode mode) {
    if (boundary_ == 0) return model_.forward(frames(idx), mode);
    const std::size_t cams = data_.camera_count;
    std::vector<std::size_t> shape{idx.size() * cams};
    shape.insert(shape.end(), tail_.begin(), tail_.end());
    Tensor<float> act(shape);
    const std::size_t per = act.size() / idx.size();
    for (std::size_t i = 0; i < idx.size(); ++i) std::copy(cache_[idx[i]].begin(), cache_[idx[i]].end(), act.ptr() + i * per);
    return model_.forward_from(act, boundary_, mode);
  }

 private:
  Network<float>& model_;
  const Dataset& data_;
  std::size_t boundary_;
  std::vector<std::size_t> tail_;
  std::vector<std::vector<float>> cache_;
};

std::vector<float> targets(const nn::Architecture& arch, const Dataset& data, std::span<const std::size_t> idx,
                           float scale = 1.0f) {
  const std::size_t w = arch.output_width();
  std::vector<float> t(idx.size() * w);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& label = data.samples[idx[i]].label;
    for (std::size_t j = 0; j < arch.output_bins.size(); ++j)
      for (std::size_t a = 0; a < 3; ++a)
        t[i * w + 3 * j + a] = scale * static_cast<float>(label.values[3 * arch.output_bins[j] + a]);
  }
  return t;
}

// Sum of squared output errors over the given samples.
double squared_error(Feeder& feed, const nn::Architecture& arch, const Dataset& data,
                     std::span<const std::size_t> idx, float scale) {
  double sq = 0.0;
  const std::size_t chunk = 32;
  for (std::size_t b = 0; b < idx.size(); b += chunk) {
    const auto part = idx.subspan(b, std::min(chunk, idx.size() - b));
    const Tensor<float> y = feed.forward(part, Mode::eval);
    const auto t = targets(arch, data, part, scale);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double e = static_cast<double>(y.data[i]) - t[i];
      sq += e * e;
    }
  }
  return sq;
}

// Power of two closest to 1 / RMS of the training labels; exact to undo.
float label_scale(const nn::Architecture& arch, const Dataset& data, std::span<const std::size_t> idx) {
  const auto t = targets(arch, data, idx);
  double sq = 0.0;
  for (float v : t) sq += static_cast<double>(v) * v;
  if (t.empty() || sq == 0.0) return 1.0f;
  const double rms = std::sqrt(sq / t.size());
  return std::ldexp(1.0f, static_cast<int>(std::lround(-std::log2(rms))));
}

void scale_fusion(Network<float>& net, float factor) {
  for (auto* p : net.layers()[net.fusion_index()]->parameters())
    for (auto& v : p->value.data) v *= factor;
}

struct Snapshot {
  std::vector<std::vector<float>> values;

  void take(Network<float>& net) {
    values.clear();
    for (auto& l : net.layers()) {
      for (auto* p : l->parameters()) values.push_back(p->value.data);
      for (auto* b : l->buffers()) values.push_back(b->data);
    }
  }
  void restore(Network<float>& net) const {
    std::size_t i = 0;
    for (auto& l : net.layers()) {
      for (auto* p : l->parameters()) p->value.data = values[i++];
      for (auto* b : l->buffers()) b->data = values[i++];
    }
  }
};

std::vector<ForceDistribution> predict_with(Feeder& feed, const nn::Architecture& arch,
                                            std::span<const std::size_t> idx) {
  std::vector<ForceDistribution> out;
  out.reserve(idx.size());
  const std::size_t chunk = 32, w = arch.output_width();
  for (std::size_t b = 0; b < idx.size(); b += chunk) {
    const auto part = idx.subspan(b, std::min(chunk, idx.size() - b));
    const Tensor<float> y = feed.forward(part, Mode::eval);
    for (std::size_t i = 0; i < part.size(); ++i)
      out.push_back(nn::to_distribution(std::span<const float>(y.ptr() + i * w, w), arch));
  }
  return out;
}

Metrics metrics_with(Feeder& feed, const nn::Architecture& arch, const Dataset& data,
                     std::span<const std::size_t> idx) {
  if (idx.empty()) return {};
  const auto pred = predict_with(feed, arch, idx);
  std::vector<ForceDistribution> truth;
  for (auto i : idx) truth.push_back(data.samples[i].label);
  return compute_metrics(pred, truth, arch.output_bins);
}

}  // namespace

std::vector<ForceDistribution> predict_samples(Network<float>& model, const Dataset& data,
                                               std::span<const std::size_t> indices) {
  check_compatible(model.architecture(), data);
  // Each worker evaluates a contiguous block on its own copy of the model.
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(thread_count(), indices.size() / 32));
  std::vector<std::vector<ForceDistribution>> parts(workers);
  std::vector<Network<float>> copies;
  for (std::size_t w = 1; w < workers; ++w) copies.push_back(model);
  const std::size_t per = (indices.size() + workers - 1) / workers;
  parallel_for(workers, [&](std::size_t w) {
    const std::size_t b = std::min(indices.size(), w * per), e = std::min(indices.size(), b + per);
    Network<float>& net = w == 0 ? model : copies[w - 1];
    Feeder feed(net, data, 0, {});
    parts[w] = predict_with(feed, net.architecture(), indices.subspan(b, e - b));
  });
  std::vector<ForceDistribution> out;
  for (auto& p : parts)
    for (auto& f : p) out.push_back(std::move(f));
  return out;
}

Metrics evaluate(Network<float>& model, const Dataset& data, std::span<const std::size_t> indices) {
  const auto pred = predict_samples(model, data, indices);
  std::vector<ForceDistribution> truth;
  for (auto i : indices) truth.push_back(data.samples[i].label);
  return compute_metrics(pred, truth, model.architecture().output_bins);
}

TrainReport train(Network<float>& model, const Dataset& data, const TrainOptions& opt) {
  opt.validate();
  const auto& arch = model.architecture();
  check_compatible(arch, data);
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::size_t> train_idx = data.indices(Split::train);
  std::vector<std::size_t> val_idx = data.indices(Split::val);
  const std::vector<std::size_t> test_idx = data.indices(Split::test);
  if (train_idx.empty()) throw ValidationError("dataset has no training samples");
  if (opt.data_fraction < 1.0) {
    Rng rng(derive_seed(opt.seed, 0x66726163));  // "frac"
    for (std::size_t i = train_idx.size(); i > 1; --i) std::swap(train_idx[i - 1], train_idx[rng.below(i)]);
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(opt.data_fraction * train_idx.size())));
    train_idx.resize(keep);
    std::sort(train_idx.begin(), train_idx.end());
  }
  // Without a validation split, early stopping watches the training error.
  const std::vector<std::size_t>& watch_idx = val_idx.empty() ? train_idx : val_idx;

  TrainReport rep;
  rep.data_fraction = opt.data_fraction;
  rep.train_samples = train_idx.size();
  rep.test_samples = test_idx.size();
  for (std::size_t i = 0; i < model.layers().size(); ++i)
    if (model.layers()[i]->frozen) rep.frozen_layers.push_back(i);

  std::size_t dropout_stream = 0;
  for (auto& l : model.layers())
    if (auto* d = dynamic_cast<nn::Dropout<float>*>(l.get())) d->reseed(derive_seed(opt.seed, 0x6470 + dropout_stream++));

  const std::size_t boundary = model.cache_boundary();
  const std::size_t stop = model.first_trainable();
  std::vector<std::size_t> needed = train_idx;
  needed.insert(needed.end(), val_idx.begin(), val_idx.end());
  needed.insert(needed.end(), test_idx.begin(), test_idx.end());
  Feeder feed(model, data, boundary, needed);

  const float ys = opt.normalize_labels ? label_scale(arch, data, train_idx) : 1.0f;
  rep.label_scale = ys;
  scale_fusion(model, ys);

  const double outputs = static_cast<double>(arch.output_width());
  const auto watch_rmse = [&] {
    return std::sqrt(squared_error(feed, arch, data, watch_idx, ys) / (outputs * watch_idx.size())) / ys;
  };

  Snapshot best;
  best.take(model);
  rep.best_val_rmse = watch_rmse();
  rep.epochs.push_back({0, std::nan(""), rep.best_val_rmse});

  nn::Adam adam({opt.learning_rate});
  auto params = model.trainable_parameters();
  std::vector<std::size_t> order = train_idx;

  try {
    for (std::size_t epoch = 1; epoch <= opt.max_epochs && stop < model.layers().size(); ++epoch) {
      Rng shuffle(derive_seed(opt.seed, epoch));
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
      double loss_sum = 0.0;
      std::size_t batches = 0;
      for (std::size_t b = 0; b < order.size(); b += opt.batch_size) {
        const std::span<const std::size_t> part(order.data() + b, std::min(opt.batch_size, order.size() - b));
        model.zero_grad();
        const Tensor<float> y = feed.forward(part, Mode::train);
        const auto t = targets(arch, data, part, ys);
        const double count = static_cast<double>(t.size());
        double sq = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
          const double e = static_cast<double>(y.data[i]) - t[i];
          sq += e * e;
        }
        const double mse = sq / count;
        const double loss = opt.rmse_loss ? std::sqrt(mse) / ys : mse / (static_cast<double>(ys) * ys);
        if (!std::isfinite(loss)) throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch));
        const double scale = opt.rmse_loss ? 1.0 / (count * std::max(std::sqrt(mse), 1e-12)) : 2.0 / count;
        Tensor<float> g(y.shape);
        for (std::size_t i = 0; i < t.size(); ++i) g.data[i] = static_cast<float>(scale * (y.data[i] - t[i]));
        model.backward(g, stop);
        adam.step(params);
        loss_sum += loss;
        ++batches;
      }
      const double val = watch_rmse();
      rep.epochs.push_back({epoch, loss_sum / batches, val});
      rep.epochs_run = epoch;
      if (!std::isfinite(val)) throw NumericalError("non-finite validation error at epoch " + std::to_string(epoch));
      if (val < rep.best_val_rmse) {
        rep.best_val_rmse = val;
        rep.best_epoch = epoch;
        best.take(model);
      } else if (epoch - rep.best_epoch >= opt.patience) {
        break;
      }
    }
  } catch (const NumericalError&) {
    best.restore(model);
    scale_fusion(model, 1.0f / ys);
    throw;
  }
  best.restore(model);
  scale_fusion(model, 1.0f / ys);

  rep.test = metrics_with(feed, arch, data, test_idx);
  rep.train = metrics_with(feed, arch, data, train_idx);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string summary_line(const Metrics& m) {
  return "RMSE_dist " + fmt(m.distribution.x) + " " + fmt(m.distribution.y) + " " + fmt(m.distribution.z) +
         " | RMSE_total " + fmt(m.total.x) + " " + fmt(m.total.y) + " " + fmt(m.total.z);
}

std::string report_csv(const TrainReport& r) {
  std::string s = "epoch,train_loss,val_rmse\n";
  for (const auto& e : r.epochs) s += std::to_string(e.epoch) + "," + fmt(e.train_loss) + "," + fmt(e.val_rmse) + "\n";
  s += "# epochs_run " + std::to_string(r.epochs_run) + " best_epoch " + std::to_string(r.best_epoch) +
       " label_scale " + fmt(r.label_scale) + " data_fraction " + fmt(r.data_fraction) + " train_samples " + std::to_string(r.train_samples) + "\n";
  s += "# " + summary_line(r.test) + "\n";
  return s;
}

}  // namespace tactile::train
