#pragma once

// Shared-weight multi-camera regressor. Every camera image goes through the
// same CNN + FC stack; the per-camera feature vectors are concatenated in
// camera order and mapped by one linear fusion layer to the force output.

#include <cstdint>
#include <memory>
#include <vector>

#include "tactile/contact.hpp"
#include "tactile/geometry.hpp"
#include "tactile/nn/layers.hpp"
#include "tactile/optics.hpp"

namespace tactile::nn {

struct Architecture {
  std::uint32_t camera_count = 4;
  std::uint32_t image_size = 64;
  std::vector<std::uint32_t> conv_channels{2, 4, 8, 16};
  std::uint32_t fc_units = 900;
  std::uint32_t feature_width = 128;
  double dropout = 0.1;
  Activation fc_activation = Activation::sigmoid;
  BinGrid grid;
  /// Bin ids predicted by the fusion layer, ascending. The output vector
  /// holds (Fx, Fy, Fz) per listed bin.
  std::vector<std::uint32_t> output_bins;

  std::size_t output_width() const { return 3 * output_bins.size(); }
  std::size_t flat_features() const;
  void validate() const;

  /// Default stack for a sensor; outputs cover every bin seen by a camera.
  static Architecture for_sensor(const SensorConfig& cfg);

  bool operator==(const Architecture&) const = default;
};

template <typename T>
class Network {
 public:
  using LayerList = std::vector<std::unique_ptr<Layer<T>>>;

  Network(Architecture arch, std::uint64_t seed);
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const Architecture& architecture() const { return arch_; }
  std::uint64_t seed() const { return seed_; }

  /// Per-camera layers followed by the fusion layer (always last).
  LayerList& layers() { return layers_; }
  const LayerList& layers() const { return layers_; }
  std::size_t fusion_index() const { return layers_.size() - 1; }
  Dense<T>& fusion() { return static_cast<Dense<T>&>(*layers_.back()); }
  const Dense<T>& fusion() const { return static_cast<const Dense<T>&>(*layers_.back()); }
  /// Indices of the Dense layers in the per-camera stack, in order.
  std::vector<std::size_t> dense_indices() const;

  /// batch: [N, cameras, H, W] -> [N, output_width].
  Tensor<T> forward(const Tensor<T>& batch, Mode mode);

  /// Activations after layers [0, end) in per-camera layout [N * cameras, ...].
  /// end may not exceed fusion_index().
  Tensor<T> prefix(const Tensor<T>& batch, std::size_t end, Mode mode);
  /// Continues from a prefix() activation.
  Tensor<T> forward_from(const Tensor<T>& activation, std::size_t start, Mode mode);

  /// Backpropagates dL/d(output) and accumulates parameter gradients down to
  /// layer `stop`. Returns dL/d(input) in batch layout when stop == 0 and
  /// want_input_grad is set, otherwise an empty tensor.
  Tensor<T> backward(const Tensor<T>& grad_output, std::size_t stop = 0,
                     bool want_input_grad = false);

  void zero_grad();
  void rewind();
  std::vector<Parameter<T>*> parameters();
  std::vector<Parameter<T>*> trainable_parameters();
  std::size_t parameter_count() const;

  /// First layer whose parameters are not frozen (layers().size() if all are).
  std::size_t first_trainable() const;
  /// Largest k such that layers [0, k) are frozen or parameter-free and
  /// deterministic, so their output can be cached across epochs.
  std::size_t cache_boundary() const;
  void set_frozen_through(std::size_t last_frozen_layer);

  std::uint64_t kink_signature() const;

 private:
  void build();
  void initialize(std::uint64_t seed);

  Architecture arch_;
  std::uint64_t seed_;
  LayerList layers_;
  std::size_t batch_ = 0;  // samples in the last forward pass
};

/// Copies values (parameters and buffers) between precisions.
template <typename To, typename From>
Network<To> convert(const Network<From>& net);

/// Stacks frames into a [1, cameras, H, W] tensor.
Tensor<float> to_tensor(const FrameSet& frames);

/// Writes a network output row into a full-grid ForceDistribution; bins
/// outside the output set are zero.
ForceDistribution to_distribution(std::span<const float> output, const Architecture& arch);

/// Eval-mode prediction. Throws ValidationError if the camera count or the
/// image size does not match the model.
ForceDistribution predict(Network<float>& model, const FrameSet& frames);

extern template class Network<float>;
extern template class Network<double>;

}  // namespace tactile::nn
