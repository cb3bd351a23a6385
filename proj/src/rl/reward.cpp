#include "curtail/rl/reward.hpp"

#include <algorithm>
#include <cmath>

namespace curtail::rl {

double reward_from_terms(double voltage_loss, double loading_loss, double curtailment, double normalizer,
                         bool converged) {
  if (!converged) return kDivergenceReward;
  if (voltage_loss + loading_loss > 0.0) {
    double v_term = 0.0;
    if (voltage_loss > 0.0) v_term = normalizer > 0.0 ? voltage_loss / normalizer : 1.0;
    return -std::min(v_term + loading_loss, 1.0);
  }
  if (normalizer <= 0.0) return 1.0;
  return 1.0 - curtailment / normalizer;
}

RewardTerms compute_reward(const Grid& grid, const SupplyTask& task, const PowerFlowSolution& pf,
                           const Setpoints& sp, double lambda) {
  const auto ctrl = grid.controllable_buses();
  if (ctrl.empty()) throw EnvironmentError("environment undefined: grid has no controllable bus");
  if (!(lambda > 1.0)) throw std::invalid_argument("lambda must be > 1");
  check_task_shape(grid, task);

  RewardTerms t;
  t.lambda = lambda;
  t.converged = pf.converged;
  const auto k = static_cast<double>(ctrl.size());

  double width = 0.0;
  double curtailed = 0.0;
  for (std::size_t j = 0; j < ctrl.size(); ++j) {
    width += std::abs(task.flex[j].p_max - task.flex[j].p_min);
    curtailed += std::abs(task.p_ref[ctrl[j]] - sp.p[j]);
  }
  t.normalizer = lambda / k * width;
  t.curtailment = curtailed / k;

  if (!pf.converged) {
    t.reward = kDivergenceReward;
    return t;
  }
  for (int i = 0; i < grid.size(); ++i) {
    const Bus& b = grid.buses[i];
    const double v = pf.v_mag[i];
    t.voltage_loss = std::max(t.voltage_loss, std::abs(v - std::clamp(v, b.v_min, b.v_max)));
  }
  for (double l : pf.loading) t.loading_loss = std::max(t.loading_loss, std::max(l - 1.0, 0.0));
  t.reward = reward_from_terms(t.voltage_loss, t.loading_loss, t.curtailment, t.normalizer, true);
  return t;
}

}  // namespace curtail::rl
