#pragma once

#include <stdexcept>

#include "curtail/power_flow.hpp"
#include "curtail/task.hpp"

namespace curtail::rl {

class EnvironmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RewardTerms {
  double voltage_loss = 0.0;  // L_V, p.u.
  double loading_loss = 0.0;  // L_I, relative
  double curtailment = 0.0;   // C_P, mean |p_ref - p_set| over controllables, p.u.
  double normalizer = 0.0;    // s = lambda / k * sum |p_max - p_min|
  double lambda = 2.0;
  bool converged = true;
  double reward = 0.0;
};

/// Reward when the power flow diverged.
inline constexpr double kDivergenceReward = -1.0;

/// The piecewise reward on precomputed terms:
///   -min(L_V / s + L_I, 1)  if L_V + L_I > 0
///   1 - C_P / s             otherwise
/// With s == 0 (no active-power flexibility) L_V / s saturates to 1 for any
/// L_V > 0 and the curtailment term is 0.
[[nodiscard]] double reward_from_terms(double voltage_loss, double loading_loss, double curtailment,
                                       double normalizer, bool converged);

/// Full-state reward after applying `sp`. Throws EnvironmentError when the
/// grid has no controllable bus.
[[nodiscard]] RewardTerms compute_reward(const Grid& grid, const SupplyTask& task, const PowerFlowSolution& pf,
                                         const Setpoints& sp, double lambda);

}  // namespace curtail::rl
