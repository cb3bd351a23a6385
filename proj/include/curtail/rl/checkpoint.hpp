#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>

#include <json.hpp>

#include "curtail/rl/train.hpp"

namespace curtail::rl {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  std::uint64_t grid_hash = 0;
  TrainConfig config;
  long step = 0;
  Agent agent;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[nodiscard]] nlohmann::json to_json(const Checkpoint& c);
[[nodiscard]] Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace curtail::rl
