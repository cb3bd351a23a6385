#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "curtail/rl/ddpg.hpp"
#include "curtail/rl/env.hpp"

namespace curtail::rl {

struct TrainConfig {
  std::uint64_t seed = 1;
  long total_steps = 100000;  // environment steps
  int steps_per_task = 5;
  int group_size = 20;
  double lambda = 2.0;
  double noise_start = 0.1;
  double noise_end = 0.01;
  long warmup = 1000;
  std::size_t buffer_capacity = 200000;
  std::size_t batch_size = 100;
  long metrics_every = 5000;
  long checkpoint_every = 0;  // 0 disables intermediate checkpoints
  int validation_size = 100;  // violating tasks held back from the training stream
  DdpgConfig ddpg;

  [[nodiscard]] nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  [[nodiscard]] std::uint64_t hash() const;
};

struct MetricsRow {
  long step = 0;
  double mean_reward = 0.0;
  double resolution_rate = 0.0;  // on the validation slice
  double critic_loss = 0.0;
  double actor_loss = 0.0;

  bool operator==(const MetricsRow&) const = default;
};

struct TrainResult {
  Agent agent;
  std::vector<MetricsRow> metrics;
  long updates = 0;
  int rejected_tasks = 0;  // tasks whose reset diverged
  double train_seconds = 0.0;
};

using CheckpointCallback = std::function<void(long step, const Agent& agent)>;

/// Share of violating tasks whose greedy rollout ends without any violation.
[[nodiscard]] double resolution_rate(CurtailmentEnv& env, const Agent& agent, std::span<const SupplyTask> tasks);

[[nodiscard]] TrainResult train(const Grid& grid, std::span<const SupplyTask> tasks, const TrainConfig& cfg,
                                const CheckpointCallback& on_checkpoint = {});

[[nodiscard]] std::string metrics_csv(std::span<const MetricsRow> rows);

}  // namespace curtail::rl
