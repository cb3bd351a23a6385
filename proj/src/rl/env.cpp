#include "curtail/rl/env.hpp"

#include <algorithm>
#include <chrono>

namespace curtail::rl {

std::vector<double> build_observation(const Grid& grid, const SupplyTask& task, std::span<const double> p_bus,
                                      std::span<const double> q_bus, std::span<const double> v_mag) {
  std::vector<double> obs;
  for (const auto& b : grid.buses) {
    if (!b.observable) continue;
    obs.push_back(p_bus[b.id]);
    obs.push_back(q_bus[b.id]);
    obs.push_back(v_mag[b.id]);
  }
  for (const auto& f : task.flex) {
    obs.push_back(f.p_min);
    obs.push_back(f.p_max);
    obs.push_back(f.q_min);
    obs.push_back(f.q_max);
  }
  return obs;
}

double action_to_setpoint(double a, double lo, double hi) {
  const double t = (std::clamp(a, -1.0, 1.0) + 1.0) / 2.0;
  return (1.0 - t) * lo + t * hi;
}

CurtailmentEnv::CurtailmentEnv(const Grid& grid, EnvConfig config)
    : model_(grid), config_(std::move(config)), ctrl_(grid.controllable_buses()) {
  if (ctrl_.empty()) throw EnvironmentError("environment undefined: grid has no controllable bus");
  if (config_.steps_per_task < 1) throw std::invalid_argument("steps_per_task must be >= 1");
  obs_size_ = 3 * static_cast<int>(grid.observable_buses().size()) + 4 * static_cast<int>(ctrl_.size());
}

std::vector<double> CurtailmentEnv::observe() const {
  const Grid& g = model_.grid();
  const int n = g.size();
  std::vector<double> p(n), q(n);
  if (state_.converged) {
    model_.bus_injections(state_.v_mag, state_.v_ang, p, q);
  } else {
    // Diverged: report the commanded injections and the last physical voltages.
    const InjectionSet inj = task_injections(g, task_, setpoints_);
    p = inj.p;
    q = inj.q;
  }
  return build_observation(g, task_, p, q, state_.converged ? state_.v_mag : last_v_);
}

std::vector<double> CurtailmentEnv::reset(const SupplyTask& task) {
  check_task_shape(model_.grid(), task);
  task_ = task;
  setpoints_ = reference_setpoints(model_.grid(), task_);
  state_ = model_.solve(task_injections(model_.grid(), task_, setpoints_), config_.pf);
  if (!state_.converged) {
    ready_ = false;
    throw EnvironmentError("power flow diverged at reset (task " + std::to_string(task.timestamp) + ")");
  }
  last_v_ = state_.v_mag;
  steps_ = 0;
  ready_ = true;
  return observe();
}

InjectionSet CurtailmentEnv::apply_action(std::span<const double> action) {
  if (!ready_) throw EnvironmentError("apply_action before reset");
  if (static_cast<int>(action.size()) != action_size())
    throw std::invalid_argument("action length does not match the controllable buses");
  const std::size_t k = ctrl_.size();
  for (std::size_t j = 0; j < k; ++j) {
    const FlexBox& f = task_.flex[j];
    setpoints_.p[j] = action_to_setpoint(action[2 * j], f.p_min, f.p_max);
    setpoints_.q[j] = action_to_setpoint(action[2 * j + 1], f.q_min, f.q_max);
  }
  return task_injections(model_.grid(), task_, setpoints_);
}

StepResult CurtailmentEnv::step(std::span<const double> action) {
  if (!ready_) throw EnvironmentError("step before reset");
  if (done()) throw EnvironmentError("step on a finished episode");
  const InjectionSet inj = apply_action(action);
  PowerFlowOptions pf = config_.pf;
  if (state_.converged) {
    pf.flat_start = false;
    pf.initial = VoltageState{state_.v_mag, state_.v_ang};
  }
  state_ = model_.solve(inj, pf);
  if (!state_.converged && !pf.flat_start) state_ = model_.solve(inj, config_.pf);
  if (state_.converged) last_v_ = state_.v_mag;
  ++steps_;

  StepResult r;
  r.terms = compute_reward(model_.grid(), task_, state_, setpoints_, config_.lambda);
  r.reward = r.terms.reward;
  r.report = assess_state(model_.grid(), state_, config_.feasibility_tol);
  r.done = done();
  r.observation = observe();
  return r;
}

Rollout greedy_rollout(CurtailmentEnv& env, const SupplyTask& task, const Policy& policy) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  Rollout out;
  std::vector<double> obs = env.reset(task);
  while (!env.done()) {
    const auto d0 = Clock::now();
    const std::vector<double> action = policy(obs);
    out.decision_seconds += std::chrono::duration<double>(Clock::now() - d0).count();
    StepResult r = env.step(action);
    out.rewards.push_back(r.reward);
    out.final_report = r.report;
    obs = std::move(r.observation);
  }
  out.final_setpoints = env.setpoints();
  out.total_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

}  // namespace curtail::rl
