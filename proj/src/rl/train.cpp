#include "curtail/rl/train.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <random>

namespace curtail::rl {

nlohmann::json TrainConfig::to_json() const {
  return {{"seed", seed},
          {"total_steps", total_steps},
          {"steps_per_task", steps_per_task},
          {"group_size", group_size},
          {"lambda", lambda},
          {"noise_start", noise_start},
          {"noise_end", noise_end},
          {"warmup", warmup},
          {"buffer_capacity", buffer_capacity},
          {"batch_size", batch_size},
          {"metrics_every", metrics_every},
          {"checkpoint_every", checkpoint_every},
          {"validation_size", validation_size},
          {"ddpg", ddpg.to_json()}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.seed = j.value("seed", c.seed);
  c.total_steps = j.value("total_steps", c.total_steps);
  c.steps_per_task = j.value("steps_per_task", c.steps_per_task);
  c.group_size = j.value("group_size", c.group_size);
  c.lambda = j.value("lambda", c.lambda);
  c.noise_start = j.value("noise_start", c.noise_start);
  c.noise_end = j.value("noise_end", c.noise_end);
  c.warmup = j.value("warmup", c.warmup);
  c.buffer_capacity = j.value("buffer_capacity", c.buffer_capacity);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.metrics_every = j.value("metrics_every", c.metrics_every);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.validation_size = j.value("validation_size", c.validation_size);
  if (j.contains("ddpg")) c.ddpg = DdpgConfig::from_json(j.at("ddpg"));
  // Flat keys are accepted as shorthand for the nested agent settings.
  c.ddpg.gamma = j.value("gamma", c.ddpg.gamma);
  c.ddpg.tau = j.value("tau", c.ddpg.tau);
  if (c.steps_per_task < 1 || c.group_size < 1 || c.batch_size < 1 || c.buffer_capacity < c.batch_size ||
      c.total_steps < 0 || !(c.lambda > 1.0))
    throw std::invalid_argument("invalid training configuration");
  return c;
}

std::uint64_t TrainConfig::hash() const { return fnv1a(to_json().dump()); }

double resolution_rate(CurtailmentEnv& env, const Agent& agent, std::span<const SupplyTask> tasks) {
  if (tasks.empty()) return 0.0;
  const Policy policy = [&agent](std::span<const double> o) { return act(agent, o); };
  int solved = 0;
  for (const auto& t : tasks) {
    const Rollout r = greedy_rollout(env, t, policy);
    if (!r.final_report.has_violation) ++solved;
  }
  return static_cast<double>(solved) / static_cast<double>(tasks.size());
}

TrainResult train(const Grid& grid, std::span<const SupplyTask> tasks, const TrainConfig& cfg,
                  const CheckpointCallback& on_checkpoint) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();

  EnvConfig env_cfg;
  env_cfg.steps_per_task = cfg.steps_per_task;
  env_cfg.lambda = cfg.lambda;
  CurtailmentEnv probe(grid, env_cfg);

  TrainResult out;
  out.agent = make_agent(probe.observation_size(), probe.action_size(), cfg.ddpg,
                         ObservationScaler::for_grid(grid), cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  if (cfg.total_steps == 0 || tasks.empty()) {
    out.train_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
  }
  Agent& agent = out.agent;
  std::mt19937_64 rng(cfg.seed);

  // Hold back a slice of violating tasks for validation.
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<SupplyTask> validation;
  std::vector<std::size_t> pool;
  for (std::size_t i : order) {
    const auto& t = tasks[i];
    const bool violating = t.labels && t.labels->has_violation;
    if (violating && static_cast<int>(validation.size()) < cfg.validation_size &&
        tasks.size() - validation.size() > static_cast<std::size_t>(cfg.group_size))
      validation.push_back(t);
    else
      pool.push_back(i);
  }
  std::sort(validation.begin(), validation.end(),
            [](const SupplyTask& a, const SupplyTask& b) { return a.timestamp < b.timestamp; });

  ReplayBuffer buffer(cfg.buffer_capacity);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  const std::size_t group = static_cast<std::size_t>(cfg.group_size);
  std::vector<CurtailmentEnv> envs(group, probe);
  std::vector<std::vector<double>> obs(group);
  std::vector<bool> live(group);

  long step = 0;
  std::size_t cursor = pool.size();
  double reward_sum = 0.0, critic_sum = 0.0, actor_sum = 0.0;
  long reward_n = 0, loss_n = 0;

  auto emit_metrics = [&]() {
    MetricsRow row;
    row.step = step;
    row.mean_reward = reward_n ? reward_sum / static_cast<double>(reward_n) : 0.0;
    row.critic_loss = loss_n ? critic_sum / static_cast<double>(loss_n) : 0.0;
    row.actor_loss = loss_n ? actor_sum / static_cast<double>(loss_n) : 0.0;
    row.resolution_rate = resolution_rate(probe, agent, validation);
    out.metrics.push_back(row);
    reward_sum = critic_sum = actor_sum = 0.0;
    reward_n = loss_n = 0;
  };

  while (step < cfg.total_steps) {
    // Load the next group of tasks, reshuffling the pool at each epoch.
    std::size_t loaded = 0;
    for (std::size_t g = 0; g < group; ++g) {
      live[g] = false;
      while (!live[g]) {
        if (cursor >= pool.size()) {
          std::shuffle(pool.begin(), pool.end(), rng);
          cursor = 0;
        }
        const SupplyTask& t = tasks[pool[cursor++]];
        try {
          obs[g] = envs[g].reset(t);
          live[g] = true;
          ++loaded;
        } catch (const EnvironmentError&) {
          ++out.rejected_tasks;
          if (out.rejected_tasks > static_cast<int>(tasks.size()))
            throw EnvironmentError("no training task admits a converged power flow");
        }
      }
    }

    for (int s = 0; s < cfg.steps_per_task && step < cfg.total_steps; ++s) {
      for (std::size_t g = 0; g < loaded && step < cfg.total_steps; ++g) {
        const double frac =
            cfg.total_steps > 1 ? static_cast<double>(step) / static_cast<double>(cfg.total_steps - 1) : 1.0;
        const double sigma = cfg.noise_start + (cfg.noise_end - cfg.noise_start) * frac;
        std::vector<double> action;
        if (static_cast<long>(buffer.insertions()) < cfg.warmup) {
          action.resize(agent.act_dim);
          for (double& a : action) a = uniform(rng);
        } else {
          action = act(agent, obs[g]);
          for (double& a : action) a = std::clamp(a + sigma * gauss(rng), -1.0, 1.0);
        }
        StepResult r = envs[g].step(action);
        reward_sum += r.reward;
        ++reward_n;
        buffer.push({obs[g], std::move(action), r.reward, r.observation, r.done});
        obs[g] = std::move(r.observation);
        ++step;

        if (static_cast<long>(buffer.insertions()) >= cfg.warmup && buffer.size() >= cfg.batch_size) {
          const auto batch = buffer.sample(cfg.batch_size, rng);
          const DdpgLosses l = ddpg_update(agent, batch, cfg.ddpg.gamma, cfg.ddpg.tau);
          if (l.ok) {
            critic_sum += l.critic_loss;
            actor_sum += l.actor_loss;
            ++loss_n;
            ++out.updates;
          }
        }
        if (cfg.metrics_every > 0 && step % cfg.metrics_every == 0) emit_metrics();
        if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0 && on_checkpoint)
          on_checkpoint(step, agent);
      }
    }
  }
  if (out.metrics.empty() || out.metrics.back().step != step) emit_metrics();
  out.train_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

std::string metrics_csv(std::span<const MetricsRow> rows) {
  std::string s = "step,mean_reward,resolution_rate,critic_loss,actor_loss\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g\n", r.step, r.mean_reward, r.resolution_rate,
                  r.critic_loss, r.actor_loss);
    s += buf;
  }
  return s;
}

}  // namespace curtail::rl
