#pragma once

#include <cstdint>

#include "curtail/nn/mlp.hpp"

namespace curtail::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const AdamConfig&) const = default;
};

struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  GradientSet m;
  GradientSet v;

  [[nodiscard]] static AdamState for_params(const MlpParams& p, AdamConfig cfg);
};

/// One bias-corrected Adam update of `params` along `grads` (descent).
void adam_step(MlpParams& params, const GradientSet& grads, AdamState& state);

}  // namespace curtail::nn
