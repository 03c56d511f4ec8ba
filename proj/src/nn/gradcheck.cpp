#include "tactile/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "tactile/rng.hpp"

namespace tactile::nn {
namespace {

struct Probe {
  std::function<Tensor<double>(const Tensor<double>&)> forward;
  std::function<Tensor<double>(const Tensor<double>&)> backward;  // returns input grad
  std::function<std::vector<Parameter<double>*>()> parameters;
  std::function<std::uint64_t()> signature;
  std::function<void()> reset;  // rewind random streams, zero grads
};

std::vector<std::size_t> pick(std::size_t n, std::size_t max_points, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (n <= max_points) return idx;
  for (std::size_t i = 0; i < max_points; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  idx.resize(max_points);
  std::sort(idx.begin(), idx.end());
  return idx;
}

GradCheckReport run(Probe& probe, Tensor<double> input, const GradCheckOptions& opt) {
  Rng rng(opt.seed);
  probe.reset();
  const Tensor<double> y0 = probe.forward(input);
  const std::uint64_t sig0 = probe.signature();
  std::vector<double> r(y0.size());
  for (auto& v : r) v = rng.normal();
  Tensor<double> gout(y0.shape);
  gout.data = r;
  const Tensor<double> gin = probe.backward(gout);

  const auto loss = [&](std::uint64_t& sig) {
    probe.reset();
    const Tensor<double> y = probe.forward(input);
    sig = probe.signature();
    double l = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) l += r[i] * y.data[i];
    return l;
  };

  GradCheckReport rep;
  const auto check = [&](double& value, double analytic, const std::string& label) {
    const double saved = value;
    const double h = opt.step * std::max(1.0, std::abs(saved));
    std::uint64_t sp = 0, sm = 0;
    value = saved + h;
    const double lp = loss(sp);
    value = saved - h;
    const double lm = loss(sm);
    value = saved;
    if (sp != sig0 || sm != sig0) {
      ++rep.excluded;
      return;
    }
    const double numeric = (lp - lm) / (2.0 * h);
    const double rel =
        std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), opt.floor});
    ++rep.checked;
    if (rel > rep.max_relative_error) {
      rep.max_relative_error = rel;
      rep.worst = label;
    }
  };

  // Analytic gradients are copied first: every loss() call resets them.
  std::vector<std::vector<double>> analytic;
  auto params = probe.parameters();
  for (auto* p : params) analytic.push_back(p->grad.data);
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i : pick(params[k]->value.size(), opt.max_points_per_tensor, rng))
      check(params[k]->value.data[i], analytic[k][i], params[k]->name + "#" + std::to_string(k) + "[" + std::to_string(i) + "]");
  }
  if (opt.check_input && gin.size() == input.size()) {
    for (std::size_t i : pick(input.size(), opt.max_points_per_tensor, rng))
      check(input.data[i], gin.data[i], "input[" + std::to_string(i) + "]");
  }
  probe.reset();
  rep.passed = rep.max_relative_error <= opt.tolerance;
  return rep;
}

}  // namespace

GradCheckReport gradient_check(Fragment& layers, const Tensor<double>& input, const GradCheckOptions& opt) {
  Probe p;
  p.forward = [&](const Tensor<double>& x) {
    Tensor<double> y = x;
    for (auto& l : layers) y = l->forward(y, opt.mode);
    return y;
  };
  p.backward = [&](const Tensor<double>& g) {
    Tensor<double> d = g;
    for (std::size_t i = layers.size(); i-- > 0;) d = layers[i]->backward(d, true);
    return d;
  };
  p.parameters = [&] {
    std::vector<Parameter<double>*> out;
    for (auto& l : layers)
      for (auto* q : l->parameters()) out.push_back(q);
    return out;
  };
  p.signature = [&] {
    std::uint64_t h = 0;
    for (auto& l : layers) h = mix64(h ^ l->kink_signature());
    return h;
  };
  p.reset = [&] {
    for (auto& l : layers) {
      l->rewind();
      for (auto* q : l->parameters()) q->zero_grad();
    }
  };
  return run(p, input, opt);
}

GradCheckReport gradient_check(Network<double>& net, const Tensor<double>& input, const GradCheckOptions& opt) {
  Probe p;
  p.forward = [&](const Tensor<double>& x) { return net.forward(x, opt.mode); };
  p.backward = [&](const Tensor<double>& g) { return net.backward(g, 0, true); };
  p.parameters = [&] { return net.trainable_parameters(); };
  p.signature = [&] { return net.kink_signature(); };
  p.reset = [&] {
    net.rewind();
    net.zero_grad();
  };
  return run(p, input, opt);
}

}  // namespace tactile::nn
