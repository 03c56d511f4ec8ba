#include "tactile/nn/network.hpp"

#include <algorithm>
#include <cmath>

#include "tactile/rng.hpp"

namespace tactile::nn {

std::size_t Architecture::flat_features() const {
  const std::size_t side = image_size >> conv_channels.size();
  return std::size_t{conv_channels.back()} * side * side;
}

void Architecture::validate() const {
  if (camera_count == 0) throw ValidationError("architecture: no cameras");
  if (conv_channels.empty()) throw ValidationError("architecture: no conv stages");
  const std::uint32_t div = 1u << conv_channels.size();
  if (image_size == 0 || image_size % div != 0)
    throw ValidationError("architecture: image size " + std::to_string(image_size) +
                          " not divisible by " + std::to_string(div));
  for (auto c : conv_channels)
    if (c == 0) throw ValidationError("architecture: zero conv width");
  if (fc_units == 0 || feature_width == 0) throw ValidationError("architecture: zero FC width");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("architecture: dropout outside [0, 1)");
  if (output_bins.empty()) throw ValidationError("architecture: empty output bin set");
  for (std::size_t i = 0; i < output_bins.size(); ++i) {
    if (output_bins[i] >= grid.count()) throw ValidationError("architecture: output bin outside grid");
    if (i > 0 && output_bins[i] <= output_bins[i - 1])
      throw ValidationError("architecture: output bins must be strictly ascending");
  }
}

Architecture Architecture::for_sensor(const SensorConfig& cfg) {
  Architecture a;
  a.camera_count = static_cast<std::uint32_t>(cfg.camera_count());
  a.image_size = cfg.image_size;
  a.grid = cfg.bins;
  a.output_bins = covered_bins(cfg);
  return a;
}

template <typename T>
Network<T>::Network(Architecture arch, std::uint64_t seed) : arch_(std::move(arch)), seed_(seed) {
  arch_.validate();
  build();
  initialize(seed);
}

template <typename T>
Network<T>::Network(const Network& other) : arch_(other.arch_), seed_(other.seed_), batch_(other.batch_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

template <typename T>
Network<T>& Network<T>::operator=(const Network& other) {
  if (this != &other) *this = Network(other);
  return *this;
}

template <typename T>
void Network<T>::build() {
  layers_.clear();
  std::size_t in = 1;
  for (auto c : arch_.conv_channels) {
    layers_.push_back(std::make_unique<Conv3x3<T>>(in, c));
    layers_.push_back(std::make_unique<BatchNorm2d<T>>(c));
    layers_.push_back(std::make_unique<ReLU<T>>());
    layers_.push_back(std::make_unique<MaxPool2<T>>());
    in = c;
  }
  const std::size_t widths[] = {arch_.fc_units, arch_.feature_width};
  std::size_t fan = arch_.flat_features();
  for (std::size_t i = 0; i < 2; ++i) {
    layers_.push_back(std::make_unique<Dense<T>>(fan, widths[i], arch_.fc_activation));
    layers_.push_back(std::make_unique<Dropout<T>>(arch_.dropout, derive_seed(seed_, 0x64726f70 + i)));
    fan = widths[i];
  }
  layers_.push_back(std::make_unique<Dense<T>>(std::size_t{arch_.camera_count} * arch_.feature_width,
                                               arch_.output_width(), Activation::linear));
}

template <typename T>
void Network<T>::initialize(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x696e6974));
  const auto fill = [&](Tensor<T>& t, double bound) {
    for (auto& v : t.data) v = static_cast<T>(rng.uniform(-bound, bound));
  };
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Layer<T>& l = *layers_[i];
    if (auto* conv = dynamic_cast<Conv3x3<T>*>(&l)) {
      fill(conv->weight.value, std::sqrt(6.0 / (conv->in_channels() * 9.0)));
      conv->bias.value.fill(T{0});
    } else if (auto* dense = dynamic_cast<Dense<T>*>(&l)) {
      double gain = i == fusion_index() ? 0.1 : 1.0;
      if (dense->activation() == Activation::relu) gain = std::sqrt(2.0);
      fill(dense->weight.value, gain * std::sqrt(3.0 / static_cast<double>(dense->in_features())));
      dense->bias.value.fill(T{0});
    }
  }
}

template <typename T>
std::vector<std::size_t> Network<T>::dense_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fusion_index(); ++i)
    if (layers_[i]->kind() == LayerKind::dense) out.push_back(i);
  return out;
}

template <typename T>
Tensor<T> Network<T>::prefix(const Tensor<T>& batch, std::size_t end, Mode mode) {
  const std::size_t cams = arch_.camera_count, n = arch_.image_size;
  if (batch.rank() != 4 || batch.dim(1) != cams || batch.dim(2) != n || batch.dim(3) != n)
    throw ValidationError("network input " + shape_string(batch.shape) + " does not match [N, " +
                          std::to_string(cams) + ", " + std::to_string(n) + ", " + std::to_string(n) + "]");
  if (end > fusion_index()) throw ValidationError("prefix end beyond the per-camera stack");
  batch_ = batch.dim(0);
  Tensor<T> x = batch.reshaped({batch_ * cams, 1, n, n});
  for (std::size_t i = 0; i < end; ++i) x = layers_[i]->forward(x, mode);
  return x;
}

template <typename T>
Tensor<T> Network<T>::forward_from(const Tensor<T>& activation, std::size_t start, Mode mode) {
  const std::size_t cams = arch_.camera_count;
  if (activation.rank() < 1 || activation.dim(0) % cams != 0)
    throw ValidationError("activation batch not a multiple of the camera count");
  batch_ = activation.dim(0) / cams;
  Tensor<T> x = activation;
  for (std::size_t i = start; i < fusion_index(); ++i) x = layers_[i]->forward(x, mode);
  x = std::move(x).reshaped({batch_, cams * arch_.feature_width});
  return layers_.back()->forward(x, mode);
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& batch, Mode mode) {
  return forward_from(prefix(batch, 0, mode), 0, mode);
}

template <typename T>
Tensor<T> Network<T>::backward(const Tensor<T>& grad_output, std::size_t stop, bool want_input_grad) {
  const std::size_t cams = arch_.camera_count;
  const std::size_t f = fusion_index();
  Tensor<T> g = layers_.back()->backward(grad_output, stop < f);
  if (stop >= f) return {};
  g = std::move(g).reshaped({batch_ * cams, arch_.feature_width});
  for (std::size_t i = f; i-- > stop;) {
    const bool need = i > stop || want_input_grad;
    g = layers_[i]->backward(g, need);
  }
  if (stop != 0 || !want_input_grad) return {};
  return std::move(g).reshaped({batch_, cams, arch_.image_size, arch_.image_size});
}

template <typename T>
void Network<T>::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

template <typename T>
void Network<T>::rewind() {
  for (auto& l : layers_) l->rewind();
}

template <typename T>
std::vector<Parameter<T>*> Network<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& l : layers_)
    for (auto* p : l->parameters()) out.push_back(p);
  return out;
}

template <typename T>
std::vector<Parameter<T>*> Network<T>::trainable_parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& l : layers_)
    if (!l->frozen)
      for (auto* p : l->parameters()) out.push_back(p);
  return out;
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l->parameter_count();
  return n;
}

template <typename T>
std::size_t Network<T>::first_trainable() const {
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (!layers_[i]->frozen && !layers_[i]->parameters().empty()) return i;
  return layers_.size();
}

template <typename T>
std::size_t Network<T>::cache_boundary() const {
  std::size_t k = 0;
  while (k < fusion_index()) {
    Layer<T>& l = *layers_[k];
    if (l.kind() == LayerKind::dropout) break;
    if (!l.frozen && !l.parameters().empty()) break;
    ++k;
  }
  return k;
}

template <typename T>
void Network<T>::set_frozen_through(std::size_t last_frozen_layer) {
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->frozen = i <= last_frozen_layer;
}

template <typename T>
std::uint64_t Network<T>::kink_signature() const {
  std::uint64_t h = 0;
  for (const auto& l : layers_) h = mix64(h ^ l->kink_signature());
  return h;
}

template <typename To, typename From>
Network<To> convert(const Network<From>& net) {
  Network<To> out(net.architecture(), net.seed());
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    Layer<From>& src = *net.layers()[i];
    Layer<To>& dst = *out.layers()[i];
    dst.frozen = src.frozen;
    auto sp = src.parameters();
    auto dp = dst.parameters();
    for (std::size_t j = 0; j < sp.size(); ++j)
      std::transform(sp[j]->value.data.begin(), sp[j]->value.data.end(), dp[j]->value.data.begin(),
                     [](From v) { return static_cast<To>(v); });
    auto sb = src.buffers();
    auto db = dst.buffers();
    for (std::size_t j = 0; j < sb.size(); ++j)
      std::transform(sb[j]->data.begin(), sb[j]->data.end(), db[j]->data.begin(),
                     [](From v) { return static_cast<To>(v); });
  }
  return out;
}

Tensor<float> to_tensor(const FrameSet& frames) {
  if (frames.frames.empty()) throw ValidationError("empty frame set");
  const std::size_t n = frames.frames.front().size;
  Tensor<float> t({1, frames.frames.size(), n, n});
  for (std::size_t k = 0; k < frames.frames.size(); ++k) {
    const Image& img = frames.frames[k];
    if (img.size != n) throw ValidationError("frames differ in size");
    std::copy(img.pixels.begin(), img.pixels.end(), t.ptr() + k * n * n);
  }
  return t;
}

ForceDistribution to_distribution(std::span<const float> output, const Architecture& arch) {
  if (output.size() != arch.output_width()) throw ValidationError("output width mismatch");
  ForceDistribution f(arch.grid);
  for (std::size_t j = 0; j < arch.output_bins.size(); ++j)
    for (std::size_t a = 0; a < 3; ++a) f.values[3 * arch.output_bins[j] + a] = output[3 * j + a];
  return f;
}

ForceDistribution predict(Network<float>& model, const FrameSet& frames) {
  const Architecture& arch = model.architecture();
  if (frames.frames.size() != arch.camera_count)
    throw ValidationError("frame set has " + std::to_string(frames.frames.size()) + " cameras, model expects " +
                          std::to_string(arch.camera_count));
  for (const Image& img : frames.frames)
    if (img.size != arch.image_size) throw ValidationError("frame size does not match the model");
  const Tensor<float> y = model.forward(to_tensor(frames), Mode::eval);
  return to_distribution(y.span(), arch);
}

template class Network<float>;
template class Network<double>;
template Network<double> convert<double, float>(const Network<float>&);
template Network<float> convert<float, double>(const Network<double>&);
template Network<float> convert<float, float>(const Network<float>&);
template Network<double> convert<double, double>(const Network<double>&);

}  // namespace tactile::nn
