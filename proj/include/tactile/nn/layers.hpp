#pragma once

// The fixed layer vocabulary: 3x3 convolution, batch normalization, ReLU,
// 2x2 max pooling, fully connected (linear / ReLU / sigmoid) and inverted
// dropout. Each layer caches what its backward pass needs from the most
// recent forward call, so forward/backward must alternate per batch.

#include <cstdint>
#include <memory>
#include <vector>

#include "tactile/nn/tensor.hpp"
#include "tactile/rng.hpp"

namespace tactile::nn {

enum class LayerKind : std::uint8_t {
  conv3x3 = 1,
  batchnorm = 2,
  relu = 3,
  maxpool2 = 4,
  dense = 5,
  dropout = 6,
};

enum class Activation : std::uint8_t { linear = 0, relu = 1, sigmoid = 2 };

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;
  /// Accumulates parameter gradients (unless frozen) and returns the
  /// gradient w.r.t. the input when need_input_grad is set.
  virtual Tensor<T> backward(const Tensor<T>& grad_out, bool need_input_grad) = 0;

  virtual std::vector<Parameter<T>*> parameters() { return {}; }
  /// Non-trainable state saved with the model (batch-norm running stats).
  virtual std::vector<Tensor<T>*> buffers() { return {}; }
  /// Layer-specific integers stored in the model file descriptor.
  virtual std::vector<std::uint32_t> descriptor() const = 0;
  virtual std::unique_ptr<Layer<T>> clone() const = 0;

  /// Hash of the discrete branch decisions taken in the last forward call
  /// (ReLU masks, pooling argmax). Used to spot kinks in gradient checks.
  virtual std::uint64_t kink_signature() const { return 0; }
  /// Restarts any internal random stream.
  virtual void rewind() {}

  bool frozen = false;

  std::size_t parameter_count() {
    std::size_t n = 0;
    for (auto* p : parameters()) n += p->value.size();
    return n;
  }
};

template <typename T>
class Conv3x3 final : public Layer<T> {
 public:
  Conv3x3(std::size_t in_channels, std::size_t out_channels);

  LayerKind kind() const override { return LayerKind::conv3x3; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out, bool need_input_grad) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight, &bias}; }
  std::vector<std::uint32_t> descriptor() const override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Conv3x3>(*this); }

  std::size_t in_channels() const { return in_; }
  std::size_t out_channels() const { return out_; }

  Parameter<T> weight;  // [out, in, 3, 3]
  Parameter<T> bias;    // [out]

 private:
  std::size_t in_;
  std::size_t out_;
  std::vector<std::size_t> input_shape_;
  std::vector<T> cols_;  // unrolled input, [N, C*9, H*W]
};

template <typename T>
class BatchNorm2d final : public Layer<T> {
 public:
  explicit BatchNorm2d(std::size_t channels, T momentum = T(0.9), T eps = T(1e-5));

  LayerKind kind() const override { return LayerKind::batchnorm; }
  /// Train mode normalizes with batch statistics over (N, H, W) and updates
  /// the running averages; eval mode, or a frozen layer, uses the running
  /// statistics. Throws ValidationError for a train-mode batch of one.
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out, bool need_input_grad) override;
  std::vector<Parameter<T>*> parameters() override { return {&gamma, &beta}; }
  std::vector<Tensor<T>*> buffers() override { return {&running_mean, &running_var}; }
  std::vector<std::uint32_t> descriptor() const override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<BatchNorm2d>(*this); }

  Parameter<T> gamma;
  Parameter<T> beta;
  Tensor<T> running_mean;
  Tensor<T> running_var;
  T momentum;
  T eps;

 private:
  std::size_t channels_;
  bool used_batch_stats_ = false;
  Tensor<T> xhat_;
  std::vector<T> inv_std_;
};

template <typename T>
class ReLU final : public Layer<T> {
 public:
  LayerKind kind() const override { return LayerKind::relu; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out, bool need_input_grad) override;
  std::vector<std::uint32_t> descriptor() const override { return {}; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<ReLU>(*this); }
  std::uint64_t kink_signature() const override;

 private:
  std::vector<std::uint8_t> mask_;
};

template <typename T>
class MaxPool2 final : public Layer<T> {
 public:
  LayerKind kind() const override { return LayerKind::maxpool2; }
  /// Throws ValidationError for odd spatial dimensions.
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out, bool need_input_grad) override;
  std::vector<std::uint32_t> descriptor() const override { return {}; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<MaxPool2>(*this); }
  std::uint64_t kink_signature() const override;

 private:
  std::vector<std::size_t> input_shape_;
  std::vector<std::uint32_t> argmax_;  // flat input index per output element
};

/// Affine map plus activation. Inputs of rank > 2 are flattened per sample.
template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::size_t in_features, std::size_t out_features, Activation act);

  LayerKind kind() const override { return LayerKind::dense; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out, bool need_input_grad) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight, &bias}; }
  std::vector<std::uint32_t> descriptor() const override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dense>(*this); }
  std::uint64_t kink_signature() const override;

  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  Activation activation() const { return act_; }

  Parameter<T> weight;  // [out, in]
  Parameter<T> bias;    // [out]

 private:
  std::size_t in_;
  std::size_t out_;
  Activation act_;
  std::vector<std::size_t> input_shape_;
  Tensor<T> input_;
  Tensor<T> output_;
};

/// Inverted dropout: train mode zeroes with probability `rate` and scales
/// survivors by 1/(1 - rate); eval mode is the identity.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  Dropout(double rate, std::uint64_t seed);

  LayerKind kind() const override { return LayerKind::dropout; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out, bool need_input_grad) override;
  std::vector<std::uint32_t> descriptor() const override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dropout>(*this); }
  void rewind() override { rng_ = Rng(seed_); }
  void reseed(std::uint64_t seed) {
    seed_ = seed;
    rewind();
  }

  double rate() const { return rate_; }

 private:
  double rate_;
  std::uint64_t seed_;
  Rng rng_;
  bool active_ = false;
  std::vector<T> scale_;
};

}  // namespace tactile::nn
