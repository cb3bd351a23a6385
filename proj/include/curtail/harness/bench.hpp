#pragma once

#include <span>

#include <json.hpp>

#include "curtail/opf.hpp"
#include "curtail/rl/checkpoint.hpp"

namespace curtail::harness {

struct BenchOptions {
  int repetitions = 5;
  std::size_t min_tasks = 20;
  OpfOptions opf;
};

/// Per-task wall-clock seconds, each the median over repetitions of the mean
/// over tasks.
struct BenchResult {
  std::size_t tasks = 0;
  int repetitions = 0;
  double inference_per_task = 0.0;  // policy evaluations of one episode
  double rollout_per_task = 0.0;    // episode including the simulated grid
  double opf_per_task = 0.0;
};

[[nodiscard]] double median_of_means(const std::vector<std::vector<double>>& samples);

/// Throws std::invalid_argument with fewer than min_tasks tasks or fewer than
/// five repetitions.
[[nodiscard]] BenchResult bench(const rl::Checkpoint& checkpoint, const Grid& grid, std::span<const SupplyTask> tasks,
                                const BenchOptions& opts = {});

[[nodiscard]] nlohmann::json to_json(const BenchResult& b);

}  // namespace curtail::harness
