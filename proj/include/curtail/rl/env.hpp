#pragma once

// Partially observable curtailment environment. The agent sees (P, Q, V) at
// observable buses and the flexibility boxes of controllable buses; the
// reward is computed from the full grid state.

#include <functional>
#include <span>
#include <vector>

#include "curtail/feasibility.hpp"
#include "curtail/rl/reward.hpp"

namespace curtail::rl {

struct EnvConfig {
  int steps_per_task = 5;
  double lambda = 2.0;
  double feasibility_tol = kDefaultFeasibilityTol;
  PowerFlowOptions pf;
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  RewardTerms terms;
  ViolationReport report;  // full-state report, for evaluation only
};

/// Observation layout: for each observable bus in id order (P, Q, V), then for
/// each controllable bus (p_min, p_max, q_min, q_max).
[[nodiscard]] std::vector<double> build_observation(const Grid& grid, const SupplyTask& task,
                                                    std::span<const double> p_bus, std::span<const double> q_bus,
                                                    std::span<const double> v_mag);

/// Affine map of a in [-1, 1] (clipped) onto [lo, hi]; the endpoints map exactly.
[[nodiscard]] double action_to_setpoint(double a, double lo, double hi);

class CurtailmentEnv {
 public:
  CurtailmentEnv(const Grid& grid, EnvConfig config);

  [[nodiscard]] int observation_size() const { return obs_size_; }
  [[nodiscard]] int action_size() const { return 2 * static_cast<int>(ctrl_.size()); }
  [[nodiscard]] const Grid& grid() const { return model_.grid(); }
  [[nodiscard]] const PowerFlowModel& model() const { return model_; }
  [[nodiscard]] const EnvConfig& config() const { return config_; }

  /// Throws EnvironmentError when the uncurtailed state does not converge.
  std::vector<double> reset(const SupplyTask& task);
  /// Maps the action onto the boxes and stores the setpoints (they persist
  /// until the next action). Action layout: (a_p, a_q) per controllable bus.
  InjectionSet apply_action(std::span<const double> action);
  StepResult step(std::span<const double> action);

  [[nodiscard]] const Setpoints& setpoints() const { return setpoints_; }
  [[nodiscard]] const PowerFlowSolution& state() const { return state_; }
  [[nodiscard]] const SupplyTask& task() const { return task_; }
  [[nodiscard]] int steps_taken() const { return steps_; }
  [[nodiscard]] bool done() const { return steps_ >= config_.steps_per_task; }

 private:
  std::vector<double> observe() const;

  PowerFlowModel model_;
  EnvConfig config_;
  std::vector<int> ctrl_;
  int obs_size_;
  SupplyTask task_;
  Setpoints setpoints_;
  PowerFlowSolution state_;
  std::vector<double> last_v_;  // last converged voltage magnitudes
  int steps_ = 0;
  bool ready_ = false;
};

using Policy = std::function<std::vector<double>(std::span<const double>)>;

struct Rollout {
  Setpoints final_setpoints;
  ViolationReport final_report;
  std::vector<double> rewards;
  double decision_seconds = 0.0;  // time spent inside the policy
  double total_seconds = 0.0;     // including the simulated grid
};

/// Presents the task steps_per_task times to a deterministic policy.
[[nodiscard]] Rollout greedy_rollout(CurtailmentEnv& env, const SupplyTask& task, const Policy& policy);

}  // namespace curtail::rl
