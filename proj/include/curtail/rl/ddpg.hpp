#pragma once

// Deterministic policy gradient actor-critic on top of nn::MlpParams.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "curtail/grid.hpp"
#include "curtail/nn/adam.hpp"
#include "curtail/nn/mlp.hpp"
#include "curtail/rl/replay.hpp"

namespace curtail::rl {

struct DdpgConfig {
  int hidden_width = 64;
  int hidden_layers = 2;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double tau = 0.005;
  double gamma = 0.95;

  [[nodiscard]] nlohmann::json to_json() const;
  static DdpgConfig from_json(const nlohmann::json& j);
};

/// Fixed affine input normalization applied in front of both networks:
/// scaled = (raw - offset) * scale.
struct ObservationScaler {
  std::vector<double> offset;
  std::vector<double> scale;

  [[nodiscard]] std::vector<double> apply(std::span<const double> raw) const;
  /// Voltages centred on 1 p.u. with the band half-width as unit; powers in
  /// units of the largest controllable rating.
  [[nodiscard]] static ObservationScaler for_grid(const Grid& grid);
  bool operator==(const ObservationScaler&) const = default;
};

struct Agent {
  int obs_dim = 0;
  int act_dim = 0;
  nn::MlpParams actor;
  nn::MlpParams critic;  // input: scaled observation followed by the action
  nn::MlpParams actor_target;
  nn::MlpParams critic_target;
  nn::AdamState actor_opt;
  nn::AdamState critic_opt;
  ObservationScaler scaler;
};

[[nodiscard]] Agent make_agent(int obs_dim, int act_dim, const DdpgConfig& cfg, ObservationScaler scaler,
                               std::uint64_t seed);

/// Deterministic action mu(o) in [-1, 1].
[[nodiscard]] std::vector<double> act(const Agent& agent, std::span<const double> observation);
[[nodiscard]] double q_value(const nn::MlpParams& critic, const Agent& agent, std::span<const double> observation,
                             std::span<const double> action);

struct DdpgLosses {
  double critic_loss = 0.0;
  double actor_loss = 0.0;  // -mean Q(o, mu(o))
  bool ok = true;
  std::string diagnostic;
};

/// Gradient of J = mean_o Q(o, mu(o)) with respect to the actor parameters.
[[nodiscard]] nn::GradientSet actor_objective_gradient(const Agent& agent,
                                                       std::span<const std::vector<double>> observations);

/// One critic regression step toward r + gamma (1 - done) Q'(o', mu'(o')),
/// one actor ascent step on Q(o, mu(o)), then soft target updates.
DdpgLosses ddpg_update(Agent& agent, std::span<const Experience* const> batch, double gamma, double tau);

}  // namespace curtail::rl
