#include "curtail/harness/bench.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>

#include "curtail/harness/evaluate.hpp"

namespace curtail::harness {

double median_of_means(const std::vector<std::vector<double>>& samples) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  std::vector<double> means;
  for (const auto& s : samples) {
    if (s.empty()) throw std::invalid_argument("empty repetition");
    means.push_back(std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size()));
  }
  std::sort(means.begin(), means.end());
  const std::size_t n = means.size();
  return n % 2 ? means[n / 2] : 0.5 * (means[n / 2 - 1] + means[n / 2]);
}

BenchResult bench(const rl::Checkpoint& checkpoint, const Grid& grid, std::span<const SupplyTask> tasks,
                  const BenchOptions& opts) {
  if (tasks.size() < opts.min_tasks)
    throw std::invalid_argument("bench needs at least " + std::to_string(opts.min_tasks) + " tasks");
  if (opts.repetitions < 5) throw std::invalid_argument("bench needs at least 5 repetitions");
  if (checkpoint.grid_hash != grid_hash(grid)) throw EvalError("checkpoint does not belong to this grid");

  rl::EnvConfig env_cfg;
  env_cfg.steps_per_task = checkpoint.config.steps_per_task;
  env_cfg.lambda = checkpoint.config.lambda;
  rl::CurtailmentEnv env(grid, env_cfg);
  const rl::Agent& agent = checkpoint.agent;
  const rl::Policy policy = [&agent](std::span<const double> o) { return rl::act(agent, o); };
  const PowerFlowModel model(grid);

  std::vector<std::vector<double>> infer(opts.repetitions), rollout(opts.repetitions), opf(opts.repetitions);
  for (int rep = 0; rep < opts.repetitions; ++rep) {
    for (const auto& t : tasks) {
      const rl::Rollout r = rl::greedy_rollout(env, t, policy);
      infer[rep].push_back(r.decision_seconds);
      rollout[rep].push_back(r.total_seconds);
      const auto t0 = std::chrono::steady_clock::now();
      const OpfSolution s = solve_opf(model, t, opts.opf);
      opf[rep].push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      (void)s;
    }
  }
  BenchResult b;
  b.tasks = tasks.size();
  b.repetitions = opts.repetitions;
  b.inference_per_task = median_of_means(infer);
  b.rollout_per_task = median_of_means(rollout);
  b.opf_per_task = median_of_means(opf);
  return b;
}

nlohmann::json to_json(const BenchResult& b) {
  return {{"tasks", b.tasks},
          {"repetitions", b.repetitions},
          {"inference_per_task", b.inference_per_task},
          {"rollout_per_task", b.rollout_per_task},
          {"opf_per_task", b.opf_per_task},
          {"opf_with_state_estimation_per_task", nullptr}};
}

}  // namespace curtail::harness
