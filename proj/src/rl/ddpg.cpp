#include "curtail/rl/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace curtail::rl {

namespace {

std::vector<double> critic_input(const Agent& agent, std::span<const double> scaled_obs,
                                 std::span<const double> action) {
  std::vector<double> in(scaled_obs.begin(), scaled_obs.end());
  in.insert(in.end(), action.begin(), action.end());
  if (static_cast<int>(in.size()) != agent.critic.input_size()) throw nn::ShapeError("critic input size mismatch");
  return in;
}

std::vector<int> layer_sizes(int in, int out, const DdpgConfig& cfg) {
  std::vector<int> s{in};
  for (int l = 0; l < cfg.hidden_layers; ++l) s.push_back(cfg.hidden_width);
  s.push_back(out);
  return s;
}

}  // namespace

nlohmann::json DdpgConfig::to_json() const {
  return {{"hidden_width", hidden_width}, {"hidden_layers", hidden_layers}, {"actor_lr", actor_lr},
          {"critic_lr", critic_lr},       {"tau", tau},                     {"gamma", gamma}};
}

DdpgConfig DdpgConfig::from_json(const nlohmann::json& j) {
  DdpgConfig c;
  c.hidden_width = j.value("hidden_width", c.hidden_width);
  c.hidden_layers = j.value("hidden_layers", c.hidden_layers);
  c.actor_lr = j.value("actor_lr", c.actor_lr);
  c.critic_lr = j.value("critic_lr", c.critic_lr);
  c.tau = j.value("tau", c.tau);
  c.gamma = j.value("gamma", c.gamma);
  return c;
}

std::vector<double> ObservationScaler::apply(std::span<const double> raw) const {
  if (raw.size() != offset.size()) throw nn::ShapeError("observation size does not match the scaler");
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - offset[i]) * scale[i];
  return out;
}

ObservationScaler ObservationScaler::for_grid(const Grid& grid) {
  double power = 0.0;
  for (const auto& b : grid.buses)
    if (b.controllable)
      power = std::max({power, std::abs(b.p_min), std::abs(b.p_max), std::abs(b.q_min), std::abs(b.q_max)});
  if (!(power > 0.0)) power = 1.0;
  ObservationScaler s;
  for (const auto& b : grid.buses) {
    if (!b.observable) continue;
    const double half_band = std::max(0.5 * (b.v_max - b.v_min), 1e-3);
    s.offset.insert(s.offset.end(), {0.0, 0.0, 1.0});
    s.scale.insert(s.scale.end(), {1.0 / power, 1.0 / power, 1.0 / half_band});
  }
  for (const auto& b : grid.buses) {
    if (!b.controllable) continue;
    s.offset.insert(s.offset.end(), 4, 0.0);
    s.scale.insert(s.scale.end(), 4, 1.0 / power);
  }
  return s;
}

Agent make_agent(int obs_dim, int act_dim, const DdpgConfig& cfg, ObservationScaler scaler, std::uint64_t seed) {
  if (obs_dim <= 0 || act_dim <= 0) throw nn::ShapeError("agent dimensions must be positive");
  if (static_cast<int>(scaler.offset.size()) != obs_dim) throw nn::ShapeError("scaler does not match obs_dim");
  std::mt19937_64 rng(seed);
  Agent a;
  a.obs_dim = obs_dim;
  a.act_dim = act_dim;
  const auto actor_sizes = layer_sizes(obs_dim, act_dim, cfg);
  const auto critic_sizes = layer_sizes(obs_dim + act_dim, 1, cfg);
  a.actor = nn::make_mlp(actor_sizes, nn::Activation::tanh, rng);
  a.critic = nn::make_mlp(critic_sizes, nn::Activation::identity, rng);
  a.actor_target = a.actor;
  a.critic_target = a.critic;
  a.actor_opt = nn::AdamState::for_params(a.actor, {cfg.actor_lr});
  a.critic_opt = nn::AdamState::for_params(a.critic, {cfg.critic_lr});
  a.scaler = std::move(scaler);
  return a;
}

std::vector<double> act(const Agent& agent, std::span<const double> observation) {
  return nn::mlp_forward(agent.actor, agent.scaler.apply(observation));
}

double q_value(const nn::MlpParams& critic, const Agent& agent, std::span<const double> observation,
               std::span<const double> action) {
  const auto scaled = agent.scaler.apply(observation);
  return nn::mlp_forward(critic, critic_input(agent, scaled, action))[0];
}

nn::GradientSet actor_objective_gradient(const Agent& agent, std::span<const std::vector<double>> observations) {
  nn::GradientSet g = nn::GradientSet::zeros_like(agent.actor);
  if (observations.empty()) return g;
  const double w = 1.0 / static_cast<double>(observations.size());
  nn::ForwardCache actor_cache, critic_cache;
  std::vector<double> grad_in(agent.critic.input_size());
  const double one[1] = {w};
  for (const auto& obs : observations) {
    const auto scaled = agent.scaler.apply(obs);
    const auto mu = nn::mlp_forward(agent.actor, scaled, actor_cache);
    const std::vector<double> action(mu.begin(), mu.end());
    (void)nn::mlp_forward(agent.critic, critic_input(agent, scaled, action), critic_cache);
    nn::mlp_backward(agent.critic, critic_cache, one, nullptr, grad_in);
    const std::span<const double> dq_da(grad_in.data() + agent.obs_dim, agent.act_dim);
    nn::mlp_backward(agent.actor, actor_cache, dq_da, &g, {});
  }
  return g;
}

DdpgLosses ddpg_update(Agent& agent, std::span<const Experience* const> batch, double gamma, double tau) {
  DdpgLosses out;
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  // Critic.
  nn::GradientSet critic_grad = nn::GradientSet::zeros_like(agent.critic);
  nn::ForwardCache cache;
  double loss = 0.0;
  for (const Experience* e : batch) {
    if (static_cast<int>(e->observation.size()) != agent.obs_dim ||
        static_cast<int>(e->next_observation.size()) != agent.obs_dim ||
        static_cast<int>(e->action.size()) != agent.act_dim)
      throw nn::ShapeError("experience shape does not match the agent");
    double target = e->reward;
    if (!e->done && gamma != 0.0) {
      const auto next_scaled = agent.scaler.apply(e->next_observation);
      const auto next_action = nn::mlp_forward(agent.actor_target, next_scaled);
      target += gamma * nn::mlp_forward(agent.critic_target, critic_input(agent, next_scaled, next_action))[0];
    }
    const auto scaled = agent.scaler.apply(e->observation);
    const double q = nn::mlp_forward(agent.critic, critic_input(agent, scaled, e->action), cache)[0];
    const double err = q - target;
    loss += err * err * inv_b;
    const double g[1] = {2.0 * err * inv_b};
    nn::mlp_backward(agent.critic, cache, g, &critic_grad, {});
  }
  out.critic_loss = loss;
  if (!std::isfinite(loss) || !critic_grad.all_finite()) {
    out.ok = false;
    out.diagnostic = "non-finite critic loss or gradient; update skipped";
    return out;
  }
  nn::adam_step(agent.critic, critic_grad, agent.critic_opt);

  // Actor: ascend mean Q(o, mu(o)) by descending its negation.
  std::vector<std::vector<double>> observations;
  observations.reserve(batch.size());
  for (const Experience* e : batch) observations.push_back(e->observation);
  nn::GradientSet actor_grad = actor_objective_gradient(agent, observations);
  double mean_q = 0.0;
  for (const auto& obs : observations) mean_q += q_value(agent.critic, agent, obs, act(agent, obs)) * inv_b;
  out.actor_loss = -mean_q;
  if (!std::isfinite(mean_q) || !actor_grad.all_finite()) {
    out.ok = false;
    out.diagnostic = "non-finite actor objective or gradient; actor update skipped";
    return out;
  }
  actor_grad.scale(-1.0);
  nn::adam_step(agent.actor, actor_grad, agent.actor_opt);

  nn::soft_update(agent.critic_target, agent.critic, tau);
  nn::soft_update(agent.actor_target, agent.actor, tau);
  return out;
}

}  // namespace curtail::rl
