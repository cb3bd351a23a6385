#include "curtail/rl/checkpoint.hpp"

#include <fstream>

#include "curtail/nn/serialize.hpp"

namespace curtail::rl {

nlohmann::json to_json(const Checkpoint& c) {
  const Agent& a = c.agent;
  return {{"format", "curtail-checkpoint"},
          {"version", kCheckpointVersion},
          {"grid_hash", hash_hex(c.grid_hash)},
          {"config_hash", hash_hex(c.config.hash())},
          {"config", c.config.to_json()},
          {"step", c.step},
          {"obs_dim", a.obs_dim},
          {"act_dim", a.act_dim},
          {"scaler", {{"offset", a.scaler.offset}, {"scale", a.scaler.scale}}},
          {"actor", nn::to_json(a.actor)},
          {"critic", nn::to_json(a.critic)},
          {"actor_target", nn::to_json(a.actor_target)},
          {"critic_target", nn::to_json(a.critic_target)},
          {"actor_opt", nn::to_json(a.actor_opt)},
          {"critic_opt", nn::to_json(a.critic_opt)}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "curtail-checkpoint") throw CheckpointError("not a checkpoint document");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw CheckpointError("unsupported checkpoint version " + j.at("version").dump());
    Checkpoint c;
    c.grid_hash = std::stoull(j.at("grid_hash").get<std::string>(), nullptr, 16);
    c.config = TrainConfig::from_json(j.at("config"));
    if (hash_hex(c.config.hash()) != j.at("config_hash").get<std::string>())
      throw CheckpointError("config hash does not match the stored config");
    c.step = j.at("step").get<long>();
    Agent& a = c.agent;
    a.obs_dim = j.at("obs_dim").get<int>();
    a.act_dim = j.at("act_dim").get<int>();
    a.scaler.offset = j.at("scaler").at("offset").get<std::vector<double>>();
    a.scaler.scale = j.at("scaler").at("scale").get<std::vector<double>>();
    a.actor = nn::mlp_from_json(j.at("actor"));
    a.critic = nn::mlp_from_json(j.at("critic"));
    a.actor_target = nn::mlp_from_json(j.at("actor_target"));
    a.critic_target = nn::mlp_from_json(j.at("critic_target"));
    a.actor_opt = nn::adam_from_json(j.at("actor_opt"));
    a.critic_opt = nn::adam_from_json(j.at("critic_opt"));
    if (a.actor.input_size() != a.obs_dim || a.actor.output_size() != a.act_dim ||
        a.critic.input_size() != a.obs_dim + a.act_dim || a.critic.output_size() != 1 ||
        static_cast<int>(a.scaler.offset.size()) != a.obs_dim || a.scaler.scale.size() != a.scaler.offset.size())
      throw CheckpointError("network shapes are inconsistent");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw CheckpointError("cannot write " + path.string());
  f << to_json(c).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw CheckpointError("cannot read " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("cannot parse " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace curtail::rl
