#include "tactile/train/recalibrate.hpp"

#include <algorithm>

namespace tactile::train {

using nn::Network;

nn::Network<float> expand_model(const Network<float>& old_model, std::uint32_t camera_count,
                                const std::vector<std::uint32_t>& output_bins, const RecalibrationOptions& opt) {
  const nn::Architecture& a_old = old_model.architecture();
  nn::Architecture a_new = a_old;
  a_new.camera_count = camera_count;
  a_new.output_bins = output_bins;
  a_new.validate();

  std::vector<std::size_t> map = opt.camera_map;
  if (map.empty())
    for (std::size_t k = 0; k < a_old.camera_count; ++k) map.push_back(k);
  if (map.size() != a_old.camera_count) throw ValidationError("camera map must list every old camera");
  for (std::size_t k = 0; k < map.size(); ++k) {
    if (map[k] >= camera_count) throw ValidationError("camera map points outside the new camera set");
    if (std::count(map.begin(), map.end(), map[k]) != 1) throw ValidationError("camera map is not one-to-one");
  }

  Network<float> net(a_new, opt.init_seed);
  const auto dense = old_model.dense_indices();
  const std::size_t last_fc = dense.back();
  for (std::size_t i = 0; i < old_model.fusion_index(); ++i) {
    if (opt.fresh_last_fc && i == last_fc) continue;
    auto src = old_model.layers()[i]->parameters();
    auto dst = net.layers()[i]->parameters();
    for (std::size_t j = 0; j < src.size(); ++j) dst[j]->value = src[j]->value;
    auto sb = old_model.layers()[i]->buffers();
    auto db = net.layers()[i]->buffers();
    for (std::size_t j = 0; j < sb.size(); ++j) *db[j] = *sb[j];
  }

  // Old fusion weights for old cameras, for bins both models predict.
  const auto& fo = old_model.fusion();
  auto& fn = net.fusion();
  const std::size_t feat = a_old.feature_width;
  const std::size_t in_old = fo.in_features(), in_new = fn.in_features();
  for (std::size_t jn = 0; jn < output_bins.size(); ++jn) {
    const auto it = std::lower_bound(a_old.output_bins.begin(), a_old.output_bins.end(), output_bins[jn]);
    if (it == a_old.output_bins.end() || *it != output_bins[jn]) continue;
    const std::size_t jo = static_cast<std::size_t>(it - a_old.output_bins.begin());
    for (std::size_t a = 0; a < 3; ++a) {
      const std::size_t ro = 3 * jo + a, rn = 3 * jn + a;
      fn.bias.value.data[rn] = fo.bias.value.data[ro];
      for (std::size_t k = 0; k < map.size(); ++k)
        std::copy_n(fo.weight.value.ptr() + ro * in_old + k * feat, feat,
                    fn.weight.value.ptr() + rn * in_new + map[k] * feat);
    }
  }
  net.set_frozen_through(dense.front());
  return net;
}

bool frozen_layers_identical(const Network<float>& source, const Network<float>& model) {
  for (std::size_t i = 0; i < model.fusion_index(); ++i) {
    if (!model.layers()[i]->frozen) continue;
    auto p0 = source.layers()[i]->parameters();
    auto p1 = model.layers()[i]->parameters();
    for (std::size_t j = 0; j < p0.size(); ++j)
      if (p0[j]->value.data != p1[j]->value.data) return false;
    auto b0 = source.layers()[i]->buffers();
    auto b1 = model.layers()[i]->buffers();
    for (std::size_t j = 0; j < b0.size(); ++j)
      if (b0[j]->data != b1[j]->data) return false;
  }
  return true;
}

RecalibrationResult recalibrate(const Network<float>& old_model, const Dataset& data,
                                const std::vector<std::uint32_t>& output_bins, const RecalibrationOptions& opt) {
  opt.train.validate();
  const auto& a = old_model.architecture();
  if (data.camera_count < a.camera_count)
    throw ValidationError("recalibration dataset has fewer cameras than the model");
  if (data.image_size != a.image_size || !(data.grid == a.grid))
    throw ValidationError("recalibration dataset does not match the model's image size or bin grid");
  RecalibrationResult r{expand_model(old_model, data.camera_count, output_bins, opt), {}, false};
  r.report = train(r.model, data, opt.train);
  r.frozen_identical = frozen_layers_identical(old_model, r.model);
  return r;
}

}  // namespace tactile::train
