#pragma once

#include <json.hpp>

#include "curtail/nn/adam.hpp"
#include "curtail/nn/mlp.hpp"

namespace curtail::nn {

[[nodiscard]] nlohmann::json to_json(const MlpParams& p);
[[nodiscard]] MlpParams mlp_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json to_json(const AdamState& s);
[[nodiscard]] AdamState adam_from_json(const nlohmann::json& j);

}  // namespace curtail::nn
