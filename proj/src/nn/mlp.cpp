#include "curtail/nn/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "curtail/nn/kernels.hpp"

namespace curtail::nn {

namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::relu:
      return x > 0.0 ? x : 0.0;
    case Activation::tanh:
      return std::tanh(x);
    case Activation::identity:
      return x;
  }
  return x;
}

// Derivative expressed through the pre-activation.
double activate_grad(Activation a, double pre) {
  switch (a) {
    case Activation::relu:
      return pre > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: {
      const double t = std::tanh(pre);
      return 1.0 - t * t;
    }
    case Activation::identity:
      return 1.0;
  }
  return 1.0;
}

Activation layer_activation(const MlpParams& p, std::size_t l) {
  return l + 1 == p.layers.size() ? p.output_activation : Activation::relu;
}

}  // namespace

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

GradientSet GradientSet::zeros_like(const MlpParams& p) {
  GradientSet g;
  for (const auto& l : p.layers) {
    g.weight.emplace_back(l.weight.size(), 0.0);
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  return g;
}

void GradientSet::set_zero() {
  for (auto& w : weight) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
}

void GradientSet::scale(double s) {
  for (auto& w : weight)
    for (double& x : w) x *= s;
  for (auto& b : bias)
    for (double& x : b) x *= s;
}

bool GradientSet::all_finite() const {
  for (const auto& w : weight)
    for (double x : w)
      if (!std::isfinite(x)) return false;
  for (const auto& b : bias)
    for (double x : b)
      if (!std::isfinite(x)) return false;
  return true;
}

MlpParams make_mlp(std::span<const int> sizes, Activation output, std::mt19937_64& rng, double final_scale) {
  if (sizes.size() < 2) throw ShapeError("an MLP needs at least input and output sizes");
  MlpParams p;
  p.output_activation = output;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.in = sizes[l];
    layer.out = sizes[l + 1];
    if (layer.in <= 0 || layer.out <= 0) throw ShapeError("layer sizes must be positive");
    const bool last = l + 2 == sizes.size();
    const double bound = last ? final_scale : 1.0 / std::sqrt(static_cast<double>(layer.in));
    std::uniform_real_distribution<double> u(-bound, bound);
    layer.weight.resize(static_cast<std::size_t>(layer.in) * layer.out);
    layer.bias.resize(layer.out);
    for (double& w : layer.weight) w = u(rng);
    for (double& b : layer.bias) b = u(rng);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

std::span<const double> mlp_forward(const MlpParams& params, std::span<const double> input, ForwardCache& cache) {
  if (params.layers.empty()) throw ShapeError("empty network");
  if (static_cast<int>(input.size()) != params.input_size())
    throw ShapeError("input length " + std::to_string(input.size()) + " does not match network input " +
                     std::to_string(params.input_size()));
  const Kernels& k = active_kernels();
  const std::size_t nl = params.layers.size();
  cache.inputs.resize(nl);
  cache.pre.resize(nl);
  cache.inputs[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < nl; ++l) {
    const DenseLayer& layer = params.layers[l];
    if (static_cast<int>(cache.inputs[l].size()) != layer.in) throw ShapeError("layer dimensions do not chain");
    auto& pre = cache.pre[l];
    pre.resize(layer.out);
    k.affine(layer.weight.data(), layer.bias.data(), cache.inputs[l].data(), pre.data(), layer.out, layer.in);
    auto& next = l + 1 < nl ? cache.inputs[l + 1] : cache.output;
    next.resize(layer.out);
    const Activation act = layer_activation(params, l);
    for (int o = 0; o < layer.out; ++o) next[o] = activate(act, pre[o]);
  }
  return cache.output;
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input) {
  ForwardCache cache;
  const auto out = mlp_forward(params, input, cache);
  return {out.begin(), out.end()};
}

void mlp_backward(const MlpParams& params, const ForwardCache& cache, std::span<const double> grad_output,
                  GradientSet* grads, std::span<double> grad_input) {
  const std::size_t nl = params.layers.size();
  if (cache.pre.size() != nl || cache.inputs.size() != nl)
    throw ShapeError("forward cache does not belong to this network");
  if (static_cast<int>(grad_output.size()) != params.output_size())
    throw ShapeError("grad_output length does not match network output");
  if (grads && (grads->weight.size() != nl || grads->bias.size() != nl))
    throw ShapeError("gradient set does not match network");
  if (!grad_input.empty() && static_cast<int>(grad_input.size()) != params.input_size())
    throw ShapeError("grad_input length does not match network input");
  for (std::size_t l = 0; l < nl; ++l)
    if (static_cast<int>(cache.pre[l].size()) != params.layers[l].out ||
        static_cast<int>(cache.inputs[l].size()) != params.layers[l].in)
      throw ShapeError("stale forward cache");

  const Kernels& k = active_kernels();
  std::vector<double> delta(grad_output.begin(), grad_output.end());
  std::vector<double> upstream;
  for (std::size_t l = nl; l-- > 0;) {
    const DenseLayer& layer = params.layers[l];
    const Activation act = layer_activation(params, l);
    for (int o = 0; o < layer.out; ++o) delta[o] *= activate_grad(act, cache.pre[l][o]);
    if (grads) {
      k.outer_acc(grads->weight[l].data(), delta.data(), cache.inputs[l].data(), layer.out, layer.in);
      k.axpy(1.0, delta.data(), grads->bias[l].data(), delta.size());
    }
    if (l == 0 && grad_input.empty()) break;
    upstream.assign(layer.in, 0.0);
    k.affine_transpose_acc(layer.weight.data(), delta.data(), upstream.data(), layer.out, layer.in);
    delta.swap(upstream);
  }
  if (!grad_input.empty()) std::copy(delta.begin(), delta.end(), grad_input.begin());
}

void soft_update(MlpParams& target, const MlpParams& online, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in (0, 1]");
  if (target.layers.size() != online.layers.size()) throw ShapeError("soft_update: layer count mismatch");
  const Kernels& k = active_kernels();
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    auto& t = target.layers[l];
    const auto& o = online.layers[l];
    if (t.in != o.in || t.out != o.out) throw ShapeError("soft_update: layer shape mismatch");
    if (tau == 1.0) {
      t.weight = o.weight;
      t.bias = o.bias;
      continue;
    }
    k.lerp(t.weight.data(), o.weight.data(), tau, t.weight.size());
    k.lerp(t.bias.data(), o.bias.data(), tau, t.bias.size());
  }
}

bool all_finite(const MlpParams& p) {
  for (const auto& l : p.layers) {
    for (double w : l.weight)
      if (!std::isfinite(w)) return false;
    for (double b : l.bias)
      if (!std::isfinite(b)) return false;
  }
  return true;
}

}  // namespace curtail::nn
