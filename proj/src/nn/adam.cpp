#include "curtail/nn/adam.hpp"

#include <cmath>

#include "curtail/nn/kernels.hpp"

namespace curtail::nn {

AdamState AdamState::for_params(const MlpParams& p, AdamConfig cfg) {
  AdamState s;
  s.config = cfg;
  s.m = GradientSet::zeros_like(p);
  s.v = GradientSet::zeros_like(p);
  return s;
}

void adam_step(MlpParams& params, const GradientSet& grads, AdamState& state) {
  const std::size_t nl = params.layers.size();
  if (grads.weight.size() != nl || state.m.weight.size() != nl || state.v.weight.size() != nl)
    throw ShapeError("adam_step: shapes do not match");
  ++state.step;
  const auto& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  const Kernels& k = active_kernels();
  for (std::size_t l = 0; l < nl; ++l) {
    auto& layer = params.layers[l];
    if (grads.weight[l].size() != layer.weight.size() || grads.bias[l].size() != layer.bias.size())
      throw ShapeError("adam_step: gradient shape mismatch");
    k.adam(layer.weight.data(), grads.weight[l].data(), state.m.weight[l].data(), state.v.weight[l].data(),
           layer.weight.size(), c.learning_rate, c.beta1, c.beta2, c.epsilon, bc1, bc2);
    k.adam(layer.bias.data(), grads.bias[l].data(), state.m.bias[l].data(), state.v.bias[l].data(),
           layer.bias.size(), c.learning_rate, c.beta1, c.beta2, c.epsilon, bc1, bc2);
  }
}

}  // namespace curtail::nn
