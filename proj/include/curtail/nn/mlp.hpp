#pragma once

// Fully connected networks with ReLU hidden layers and exact backprop.

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace curtail::nn {

enum class Activation { relu, tanh, identity };

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weight;  // row-major, out x in
  std::vector<double> bias;

  bool operator==(const DenseLayer&) const = default;
};

struct MlpParams {
  std::vector<DenseLayer> layers;
  Activation output_activation = Activation::identity;

  [[nodiscard]] int input_size() const { return layers.empty() ? 0 : layers.front().in; }
  [[nodiscard]] int output_size() const { return layers.empty() ? 0 : layers.back().out; }
  [[nodiscard]] std::size_t parameter_count() const;
  bool operator==(const MlpParams&) const = default;
};

/// Gradients shaped like MlpParams.
struct GradientSet {
  std::vector<std::vector<double>> weight;
  std::vector<std::vector<double>> bias;

  [[nodiscard]] static GradientSet zeros_like(const MlpParams& p);
  void set_zero();
  void scale(double s);
  [[nodiscard]] bool all_finite() const;
};

/// Per-layer inputs and pre-activations retained for the backward pass.
struct ForwardCache {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> pre;
  std::vector<double> output;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Layer sizes {in, h1, ..., out}. Hidden weights uniform in +/- 1/sqrt(fan_in),
/// the final layer uniform in +/- final_scale.
[[nodiscard]] MlpParams make_mlp(std::span<const int> sizes, Activation output, std::mt19937_64& rng,
                                 double final_scale = 3e-3);

[[nodiscard]] std::span<const double> mlp_forward(const MlpParams& params, std::span<const double> input,
                                                  ForwardCache& cache);
[[nodiscard]] std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input);

/// Accumulates d(output . grad_output)/d(params) into `grads` and, when
/// `grad_input` is non-empty, writes the input gradient there.
void mlp_backward(const MlpParams& params, const ForwardCache& cache, std::span<const double> grad_output,
                  GradientSet* grads, std::span<double> grad_input);

/// target <- tau * online + (1 - tau) * target
void soft_update(MlpParams& target, const MlpParams& online, double tau);

[[nodiscard]] bool all_finite(const MlpParams& p);

}  // namespace curtail::nn
