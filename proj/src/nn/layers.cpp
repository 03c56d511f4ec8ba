#include "tactile/nn/layers.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace tactile::nn {
namespace {

std::uint64_t hash_bytes(const void* data, std::size_t n) {
  return fnv1a(std::string_view(static_cast<const char*>(data), n));
}

template <typename T>
void require_rank4(const Tensor<T>& x, std::size_t channels, const char* who) {
  if (x.rank() != 4) throw ValidationError(std::string(who) + ": expected [N, C, H, W], got " + shape_string(x.shape));
  if (channels != 0 && x.dim(1) != channels)
    throw ValidationError(std::string(who) + ": channel mismatch, expected " + std::to_string(channels) +
                          ", got " + shape_string(x.shape));
}

}  // namespace

// ---------------------------------------------------------------- conv

template <typename T>
Conv3x3<T>::Conv3x3(std::size_t in_channels, std::size_t out_channels)
    : weight("conv.weight", {out_channels, in_channels, 3, 3}),
      bias("conv.bias", {out_channels}),
      in_(in_channels),
      out_(out_channels) {
  if (in_channels == 0 || out_channels == 0) throw ValidationError("conv: zero channels");
}

template <typename T>
std::vector<std::uint32_t> Conv3x3<T>::descriptor() const {
  return {static_cast<std::uint32_t>(in_), static_cast<std::uint32_t>(out_)};
}

// The input is unrolled into columns [C*9, H*W] (zero padded), after which
// every output plane is a sum of axpys over the rows of that matrix.
template <typename T>
Tensor<T> Conv3x3<T>::forward(const Tensor<T>& x, Mode) {
  require_rank4(x, in_, "conv");
  const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3), hw = h * w;
  const std::size_t rows = in_ * 9;
  input_shape_ = x.shape;
  cols_.assign(n * rows * hw, T{0});
  Tensor<T> y({n, out_, h, w});
  for (std::size_t s = 0; s < n; ++s) {
    T* cols = cols_.data() + s * rows * hw;
    const T* xs = x.ptr() + s * in_ * hw;
    for (std::size_t c = 0; c < in_; ++c) {
      for (int t = 0; t < 9; ++t) {
        const int dy = t / 3 - 1, dx = t % 3 - 1;
        T* col = cols + (c * 9 + t) * hw;
        const std::size_t x0 = dx < 0 ? 1 : 0;
        const std::size_t x1 = dx > 0 ? w - 1 : w;
        for (std::size_t r = 0; r < h; ++r) {
          const long sr = static_cast<long>(r) + dy;
          if (sr < 0 || sr >= static_cast<long>(h) || x1 <= x0) continue;
          const T* src = xs + c * hw + static_cast<std::size_t>(sr) * w;
          std::memcpy(col + r * w + x0, src + x0 + dx, (x1 - x0) * sizeof(T));
        }
      }
    }
    T* ys = y.ptr() + s * out_ * hw;
    for (std::size_t k = 0; k < out_; ++k) {
      T* plane = ys + k * hw;
      std::fill(plane, plane + hw, bias.value.data[k]);
      const T* wk = weight.value.ptr() + k * rows;
      for (std::size_t j = 0; j < rows; ++j) ops::axpy(wk[j], cols + j * hw, plane, hw);
    }
  }
  return y;
}

template <typename T>
Tensor<T> Conv3x3<T>::backward(const Tensor<T>& g, bool need_input_grad) {
  if (input_shape_.size() != 4) throw ValidationError("conv backward before forward");
  const std::size_t n = input_shape_[0], h = input_shape_[2], w = input_shape_[3], hw = h * w;
  const std::size_t rows = in_ * 9;
  if (g.shape != std::vector<std::size_t>{n, out_, h, w})
    throw ValidationError("conv backward: gradient shape " + shape_string(g.shape));
  Tensor<T> gx;
  if (need_input_grad) gx = Tensor<T>({n, in_, h, w});
  std::vector<T> gcols(need_input_grad ? rows * hw : 0);
  for (std::size_t s = 0; s < n; ++s) {
    const T* cols = cols_.data() + s * rows * hw;
    const T* gs = g.ptr() + s * out_ * hw;
    if (!this->frozen) {
      for (std::size_t k = 0; k < out_; ++k) {
        const T* gk = gs + k * hw;
        T* gw = weight.grad.ptr() + k * rows;
        for (std::size_t j = 0; j < rows; ++j) gw[j] += ops::dot(gk, cols + j * hw, hw);
        T b = 0;
        for (std::size_t i = 0; i < hw; ++i) b += gk[i];
        bias.grad.data[k] += b;
      }
    }
    if (!need_input_grad) continue;
    std::fill(gcols.begin(), gcols.end(), T{0});
    for (std::size_t k = 0; k < out_; ++k) {
      const T* wk = weight.value.ptr() + k * rows;
      for (std::size_t j = 0; j < rows; ++j) ops::axpy(wk[j], gs + k * hw, gcols.data() + j * hw, hw);
    }
    T* gxs = gx.ptr() + s * in_ * hw;
    for (std::size_t c = 0; c < in_; ++c) {
      for (int t = 0; t < 9; ++t) {
        const int dy = t / 3 - 1, dx = t % 3 - 1;
        const T* col = gcols.data() + (c * 9 + t) * hw;
        const std::size_t x0 = dx < 0 ? 1 : 0;
        const std::size_t x1 = dx > 0 ? w - 1 : w;
        for (std::size_t r = 0; r < h; ++r) {
          const long sr = static_cast<long>(r) + dy;
          if (sr < 0 || sr >= static_cast<long>(h) || x1 <= x0) continue;
          T* dst = gxs + c * hw + static_cast<std::size_t>(sr) * w + dx;
          const T* src = col + r * w;
          for (std::size_t i = x0; i < x1; ++i) dst[i] += src[i];
        }
      }
    }
  }
  return gx;
}

// ----------------------------------------------------------- batchnorm

template <typename T>
BatchNorm2d<T>::BatchNorm2d(std::size_t channels, T momentum_, T eps_)
    : gamma("bn.gamma", {channels}),
      beta("bn.beta", {channels}),
      running_mean({channels}, T{0}),
      running_var({channels}, T{1}),
      momentum(momentum_),
      eps(eps_),
      channels_(channels) {
  gamma.value.fill(T{1});
}

template <typename T>
std::vector<std::uint32_t> BatchNorm2d<T>::descriptor() const {
  return {static_cast<std::uint32_t>(channels_)};
}

template <typename T>
Tensor<T> BatchNorm2d<T>::forward(const Tensor<T>& x, Mode mode) {
  require_rank4(x, channels_, "batchnorm");
  const std::size_t n = x.dim(0), hw = x.dim(2) * x.dim(3);
  used_batch_stats_ = mode == Mode::train && !this->frozen;
  if (used_batch_stats_ && n < 2) throw ValidationError("batchnorm: train mode needs a batch of at least 2");
  inv_std_.assign(channels_, T{0});
  xhat_ = Tensor<T>(x.shape);
  Tensor<T> y(x.shape);
  const double count = static_cast<double>(n * hw);
  for (std::size_t c = 0; c < channels_; ++c) {
    T mean, var;
    if (used_batch_stats_) {
      double sum = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        const T* p = x.ptr() + (s * channels_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) sum += p[i];
      }
      const double m = sum / count;
      double sq = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        const T* p = x.ptr() + (s * channels_ + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) sq += (p[i] - m) * (p[i] - m);
      }
      mean = static_cast<T>(m);
      var = static_cast<T>(sq / count);
      running_mean.data[c] = momentum * running_mean.data[c] + (1 - momentum) * mean;
      running_var.data[c] = momentum * running_var.data[c] + (1 - momentum) * var;
    } else {
      mean = running_mean.data[c];
      var = running_var.data[c];
    }
    const T inv = T{1} / std::sqrt(var + eps);
    inv_std_[c] = inv;
    const T g = gamma.value.data[c], b = beta.value.data[c];
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t off = (s * channels_ + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        const T xh = (x.data[off + i] - mean) * inv;
        xhat_.data[off + i] = xh;
        y.data[off + i] = g * xh + b;
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::backward(const Tensor<T>& g, bool need_input_grad) {
  if (g.shape != xhat_.shape) throw ValidationError("batchnorm backward: gradient shape " + shape_string(g.shape));
  const std::size_t n = g.dim(0), hw = g.dim(2) * g.dim(3);
  const T count = static_cast<T>(n * hw);
  Tensor<T> gx;
  if (need_input_grad) gx = Tensor<T>(g.shape);
  for (std::size_t c = 0; c < channels_; ++c) {
    T sum_g = 0, sum_gx = 0;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t off = (s * channels_ + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        sum_g += g.data[off + i];
        sum_gx += g.data[off + i] * xhat_.data[off + i];
      }
    }
    if (!this->frozen) {
      gamma.grad.data[c] += sum_gx;
      beta.grad.data[c] += sum_g;
    }
    if (!need_input_grad) continue;
    const T k = gamma.value.data[c] * inv_std_[c];
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t off = (s * channels_ + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        if (used_batch_stats_)
          gx.data[off + i] = k * (g.data[off + i] - sum_g / count - xhat_.data[off + i] * sum_gx / count);
        else
          gx.data[off + i] = k * g.data[off + i];
      }
    }
  }
  return gx;
}

// ---------------------------------------------------------------- relu

template <typename T>
Tensor<T> ReLU<T>::forward(const Tensor<T>& x, Mode) {
  Tensor<T> y(x.shape);
  mask_.resize(x.size());
  const T* xp = x.ptr();
  T* yp = y.ptr();
  std::uint8_t* mp = mask_.data();
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool on = xp[i] > T{0};
    mp[i] = on;
    yp[i] = on ? xp[i] : T{0};
  }
  return y;
}

template <typename T>
Tensor<T> ReLU<T>::backward(const Tensor<T>& g, bool need_input_grad) {
  if (!need_input_grad) return {};
  if (g.size() != mask_.size()) throw ValidationError("relu backward: size mismatch");
  Tensor<T> gx(g.shape);
  const T* gp = g.ptr();
  T* out = gx.ptr();
  const std::uint8_t* mp = mask_.data();
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = mp[i] ? gp[i] : T{0};
  return gx;
}

template <typename T>
std::uint64_t ReLU<T>::kink_signature() const {
  return hash_bytes(mask_.data(), mask_.size());
}

// ------------------------------------------------------------- maxpool

template <typename T>
Tensor<T> MaxPool2<T>::forward(const Tensor<T>& x, Mode) {
  require_rank4(x, 0, "maxpool");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h % 2 != 0 || w % 2 != 0) throw ValidationError("maxpool: odd spatial size " + shape_string(x.shape));
  input_shape_ = x.shape;
  const std::size_t oh = h / 2, ow = w / 2;
  Tensor<T> y({n, c, oh, ow});
  argmax_.resize(y.size());
  std::size_t o = 0;
  for (std::size_t p = 0; p < n * c; ++p) {
    const std::size_t base = p * h * w;
    for (std::size_t r = 0; r < oh; ++r) {
      for (std::size_t q = 0; q < ow; ++q, ++o) {
        const std::size_t i0 = base + 2 * r * w + 2 * q;
        const std::size_t cand[4] = {i0, i0 + 1, i0 + w, i0 + w + 1};
        std::size_t best = cand[0];
        for (int k = 1; k < 4; ++k)
          if (x.data[cand[k]] > x.data[best]) best = cand[k];  // ties keep the first
        argmax_[o] = static_cast<std::uint32_t>(best);
        y.data[o] = x.data[best];
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> MaxPool2<T>::backward(const Tensor<T>& g, bool need_input_grad) {
  if (!need_input_grad) return {};
  if (g.size() != argmax_.size()) throw ValidationError("maxpool backward: size mismatch");
  Tensor<T> gx(input_shape_);
  for (std::size_t o = 0; o < g.size(); ++o) gx.data[argmax_[o]] += g.data[o];
  return gx;
}

template <typename T>
std::uint64_t MaxPool2<T>::kink_signature() const {
  return hash_bytes(argmax_.data(), argmax_.size() * sizeof(std::uint32_t));
}

// --------------------------------------------------------------- dense

template <typename T>
Dense<T>::Dense(std::size_t in_features, std::size_t out_features, Activation act)
    : weight("dense.weight", {out_features, in_features}),
      bias("dense.bias", {out_features}),
      in_(in_features),
      out_(out_features),
      act_(act) {
  if (in_features == 0 || out_features == 0) throw ValidationError("dense: zero width");
}

template <typename T>
std::vector<std::uint32_t> Dense<T>::descriptor() const {
  return {static_cast<std::uint32_t>(in_), static_cast<std::uint32_t>(out_),
          static_cast<std::uint32_t>(act_)};
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& x, Mode) {
  if (x.rank() < 1 || x.size() != x.dim(0) * in_)
    throw ValidationError("dense: input " + shape_string(x.shape) + " does not match " +
                          std::to_string(in_) + " features");
  const std::size_t n = x.dim(0);
  input_shape_ = x.shape;
  input_ = x;
  output_ = Tensor<T>({n, out_});
  // Weight rows outer so each row is streamed once per batch.
  for (std::size_t o = 0; o < out_; ++o) {
    const T* wo = weight.value.ptr() + o * in_;
    for (std::size_t s = 0; s < n; ++s) {
      T v = ops::dot(wo, x.ptr() + s * in_, in_) + bias.value.data[o];
      switch (act_) {
        case Activation::linear: break;
        case Activation::relu: v = v > T{0} ? v : T{0}; break;
        case Activation::sigmoid: v = T{1} / (T{1} + std::exp(-v)); break;
      }
      output_.data[s * out_ + o] = v;
    }
  }
  return output_;
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& g, bool need_input_grad) {
  const std::size_t n = output_.dim(0);
  if (g.size() != n * out_) throw ValidationError("dense backward: gradient shape " + shape_string(g.shape));
  Tensor<T> gz({n, out_});  // gradient before the activation
  for (std::size_t i = 0; i < gz.size(); ++i) {
    const T y = output_.data[i];
    switch (act_) {
      case Activation::linear: gz.data[i] = g.data[i]; break;
      case Activation::relu: gz.data[i] = y > T{0} ? g.data[i] : T{0}; break;
      case Activation::sigmoid: gz.data[i] = g.data[i] * y * (T{1} - y); break;
    }
  }
  Tensor<T> gx;
  if (need_input_grad) gx = Tensor<T>(input_shape_);
  for (std::size_t o = 0; o < out_; ++o) {
    const T* wo = weight.value.ptr() + o * in_;
    T* gwo = weight.grad.ptr() + o * in_;
    for (std::size_t s = 0; s < n; ++s) {
      const T go = gz.data[s * out_ + o];
      if (go == T{0}) continue;
      if (!this->frozen) {
        ops::axpy(go, input_.ptr() + s * in_, gwo, in_);
        bias.grad.data[o] += go;
      }
      if (need_input_grad) ops::axpy(go, wo, gx.ptr() + s * in_, in_);
    }
  }
  return gx;
}

template <typename T>
std::uint64_t Dense<T>::kink_signature() const {
  if (act_ != Activation::relu) return 0;
  std::vector<std::uint8_t> mask(output_.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = output_.data[i] > T{0};
  return hash_bytes(mask.data(), mask.size());
}

// ------------------------------------------------------------- dropout

template <typename T>
Dropout<T>::Dropout(double rate, std::uint64_t seed) : rate_(rate), seed_(seed), rng_(seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ValidationError("dropout: rate must lie in [0, 1)");
}

template <typename T>
std::vector<std::uint32_t> Dropout<T>::descriptor() const {
  return {static_cast<std::uint32_t>(std::lround(rate_ * 1e6))};
}

template <typename T>
Tensor<T> Dropout<T>::forward(const Tensor<T>& x, Mode mode) {
  active_ = mode == Mode::train && rate_ > 0.0;
  if (!active_) return x;
  const T keep = static_cast<T>(1.0 / (1.0 - rate_));
  scale_.resize(x.size());
  Tensor<T> y(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) {
    scale_[i] = rng_.uniform() < rate_ ? T{0} : keep;
    y.data[i] = x.data[i] * scale_[i];
  }
  return y;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const Tensor<T>& g, bool need_input_grad) {
  if (!need_input_grad) return {};
  if (!active_) return g;
  if (g.size() != scale_.size()) throw ValidationError("dropout backward: size mismatch");
  Tensor<T> gx(g.shape);
  for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] = g.data[i] * scale_[i];
  return gx;
}

template class Conv3x3<float>;
template class Conv3x3<double>;
template class BatchNorm2d<float>;
template class BatchNorm2d<double>;
template class ReLU<float>;
template class ReLU<double>;
template class MaxPool2<float>;
template class MaxPool2<double>;
template class Dense<float>;
template class Dense<double>;
template class Dropout<float>;
template class Dropout<double>;

}  // namespace tactile::nn
