#include <doctest.h>

#include <filesystem>
#include <random>

#include "curtail/rl/checkpoint.hpp"
#include "curtail/rl/ddpg.hpp"
#include "curtail/rl/train.hpp"
#include "curtail/scenario.hpp"
#include "grad_oracle.hpp"
#include "support.hpp"

using namespace curtail;
using namespace curtail::rl;

namespace {

ObservationScaler unit_scaler(int n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)}; }

double objective(const Agent& a, const std::vector<std::vector<double>>& obs) {
  long double s = 0.0L;
  for (const auto& o : obs) s += q_value(a.critic, a, o, act(a, o));
  return static_cast<double>(s / obs.size());
}

std::vector<SupplyTask> fixture_tasks(const Grid& g, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pv(0.0, 0.3), load(0.0, 0.05);
  std::vector<SupplyTask> out;
  for (int i = 0; i < n; ++i) {
    const double p = pv(rng);
    SupplyTask t = testing::make_task(g, {0.0, -load(rng), -load(rng), p, -load(rng)}, {0.0, 0.0, 0.0, 0.0, 0.0});
    t.flex[0].p_max = p;
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST_CASE("observation scaler") {
  const Grid g = testing::feeder5();
  const auto s = ObservationScaler::for_grid(g);
  REQUIRE(s.offset.size() == 7);
  const std::vector<double> raw = {0.3, 0.1, 1.05, 0.0, 0.3, -0.1, 0.1};
  const auto y = s.apply(raw);
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[2] == doctest::Approx(1.0));
  CHECK(y[5] == doctest::Approx(-1.0 / 3.0));
  CHECK_THROWS_AS((void)s.apply(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("critic regresses onto the immediate reward when gamma is zero") {
  Agent a = make_agent(3, 2, {}, unit_scaler(3), 4);
  Experience e{{0.2, -0.1, 0.5}, {0.3, -0.4}, 0.75, {0.1, 0.1, 0.1}, false};
  std::vector<const Experience*> batch(16, &e);
  double previous = 1e300;
  int iterations = 0;
  while (previous > 1e-3 && iterations++ < 2000) {
    const double before = q_value(a.critic, a, e.observation, e.action);
    const DdpgLosses l = ddpg_update(a, batch, 0.0, 0.005);
    REQUIRE(l.ok);
    CHECK(l.critic_loss == doctest::Approx((before - 0.75) * (before - 0.75)).epsilon(1e-9));
    CHECK(l.critic_loss < previous);
    previous = l.critic_loss;
  }
  CHECK(previous <= 1e-3);
}

TEST_CASE("actor gradient matches finite differences") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n01;
  DdpgConfig cfg;
  cfg.hidden_width = 4;
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Agent a = make_agent(3, 2, cfg, unit_scaler(3), 100 + trial);
    // Larger heads so that the objective is far from numerical noise.
    for (auto* net : {&a.actor, &a.critic})
      for (double& w : net->layers.back().weight) w *= 100.0;
    std::vector<std::vector<double>> obs(4, std::vector<double>(3));
    for (auto& o : obs)
      for (double& x : o) x = n01(rng);
    const nn::GradientSet g = actor_objective_gradient(a, obs);
    const double h = 1e-6;
    for (std::size_t l = 0; l < a.actor.layers.size(); ++l) {
      for (std::size_t k = 0; k < a.actor.layers[l].weight.size(); ++k) {
        Agent p = a, m = a;
        p.actor.layers[l].weight[k] += h;
        m.actor.layers[l].weight[k] -= h;
        const double fd = (objective(p, obs) - objective(m, obs)) / (2 * h);
        // Skip components whose probes straddle a ReLU kink.
        const double fd_half =
            (objective(p, obs) - objective(a, obs)) / h - (objective(a, obs) - objective(m, obs)) / h;
        if (std::abs(fd_half) > 1e-3 * (std::abs(fd) + 1e-6)) continue;
        CHECK(testing::relative_error(g.weight[l][k], fd) < 1e-3);
        ++checked;
      }
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("tau one copies online into target") {
  Agent a = make_agent(3, 2, {}, unit_scaler(3), 8);
  Experience e{{0.2, -0.1, 0.5}, {0.3, -0.4}, 0.75, {0.1, 0.1, 0.1}, false};
  std::vector<const Experience*> batch(4, &e);
  REQUIRE(ddpg_update(a, batch, 0.95, 1.0).ok);
  CHECK(a.actor_target == a.actor);
  CHECK(a.critic_target == a.critic);
}

TEST_CASE("non-finite losses skip the update") {
  Agent a = make_agent(3, 2, {}, unit_scaler(3), 8);
  const Agent before = a;
  Experience e{{0.2, -0.1, 0.5}, {0.3, -0.4}, std::numeric_limits<double>::quiet_NaN(), {0.1, 0.1, 0.1}, false};
  std::vector<const Experience*> batch(4, &e);
  const DdpgLosses l = ddpg_update(a, batch, 0.95, 0.005);
  CHECK_FALSE(l.ok);
  CHECK_FALSE(l.diagnostic.empty());
  CHECK(a.critic == before.critic);
  CHECK(nn::all_finite(a.actor));
}

TEST_CASE("zero training steps return the initial agent") {
  const Grid g = testing::feeder5();
  const auto tasks = fixture_tasks(g, 30, 1);
  TrainConfig cfg;
  cfg.total_steps = 0;
  cfg.seed = 21;
  const TrainResult r = train(g, tasks, cfg);
  CHECK(r.updates == 0);
  const Agent fresh = make_agent(7, 2, cfg.ddpg, ObservationScaler::for_grid(g),
                                 cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  CHECK(r.agent.actor == fresh.actor);
  CHECK(r.agent.critic == fresh.critic);
}

TEST_CASE("training is deterministic and checkpoints round trip") {
  const Grid g = testing::feeder5();
  const auto tasks = fixture_tasks(g, 60, 2);
  TrainConfig cfg;
  cfg.total_steps = 1500;
  cfg.warmup = 200;
  cfg.metrics_every = 500;
  cfg.validation_size = 5;
  cfg.seed = 3;
  std::vector<long> checkpoints;
  cfg.checkpoint_every = 500;
  const TrainResult a = train(g, tasks, cfg, [&](long step, const Agent&) { checkpoints.push_back(step); });
  const TrainResult b = train(g, tasks, cfg);
  CHECK(a.metrics == b.metrics);
  CHECK(a.agent.actor == b.agent.actor);
  CHECK(a.metrics.size() == 3);
  CHECK(checkpoints == std::vector<long>{500, 1000, 1500});
  CHECK(a.updates > 0);
  CHECK(metrics_csv(a.metrics).rfind("step,mean_reward,resolution_rate,critic_loss,actor_loss\n", 0) == 0);

  Checkpoint c{grid_hash(g), cfg, 1500, a.agent};
  const auto path = std::filesystem::temp_directory_path() / "curtail_ddpg_roundtrip.json";
  save_checkpoint(c, path);
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.grid_hash == c.grid_hash);
  CHECK(back.step == 1500);
  CHECK(back.config.hash() == cfg.hash());
  CHECK(back.agent.actor == a.agent.actor);
  CHECK(back.agent.critic_target == a.agent.critic_target);
  CHECK(back.agent.actor_opt.step == a.agent.actor_opt.step);
  CHECK(back.agent.scaler == a.agent.scaler);
  auto j = to_json(c);
  j["obs_dim"] = 9;
  CHECK_THROWS_AS((void)checkpoint_from_json(j), CheckpointError);
  std::filesystem::remove(path);
}

TEST_CASE("config validation") {
  nlohmann::json j = TrainConfig{}.to_json();
  CHECK(TrainConfig::from_json(j).hash() == TrainConfig{}.hash());
  j["batch_size"] = 0;
  CHECK_THROWS((void)TrainConfig::from_json(j));
  nlohmann::json flat = {{"gamma", 0.5}, {"tau", 0.1}};
  const auto c = TrainConfig::from_json(flat);
  CHECK(c.ddpg.gamma == 0.5);
  CHECK(c.ddpg.tau == 0.1);
}
