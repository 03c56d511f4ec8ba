#include "tactile/nn/adam.hpp"

#include <cmath>

namespace tactile::nn {

void Adam::step(std::span<Parameter<float>* const> params) {
  if (m_.empty() && t_ == 0) {
    for (auto* p : params) {
      m_.emplace_back(p->value.size(), 0.0f);
      v_.emplace_back(p->value.size(), 0.0f);
    }
  }
  if (params.size() != m_.size()) throw ValidationError("adam: parameter list changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = *params[i];
    if (p.grad.size() != m_[i].size() || p.value.size() != m_[i].size())
      throw ValidationError("adam: shape of '" + p.name + "' changed between steps");
    for (std::size_t j = 0; j < p.grad.size(); ++j)
      if (!std::isfinite(p.grad.data[j]))
        throw NumericalError("adam: non-finite gradient in '" + p.name + "' at element " + std::to_string(j) +
                             " (step " + std::to_string(t_ + 1) + ")");
  }
  ++t_;
  const simd::AdamCoefficients c{
      static_cast<float>(cfg_.lr),
      static_cast<float>(cfg_.beta1),
      static_cast<float>(cfg_.beta2),
      static_cast<float>(1.0 - cfg_.beta1),
      static_cast<float>(1.0 - cfg_.beta2),
      static_cast<float>(cfg_.eps),
      static_cast<float>(1.0 - std::pow(cfg_.beta1, static_cast<double>(t_))),
      static_cast<float>(1.0 - std::pow(cfg_.beta2, static_cast<double>(t_))),
  };
  const auto& k = simd::kernels();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i];
    k.adam_update(p.value.ptr(), p.grad.ptr(), m_[i].data(), v_[i].data(), p.value.size(), c);
  }
}

}  // namespace tactile::nn
