#pragma once

// Dataset factory: synthetic load/PV time series turned into labeled supply
// tasks, plus bound augmentation and the provenance-based train/test split.
//
// Load shape (hour h in [0, 24)):
//   s(h) = 0.25 + 0.45 g(h; 7.5, 1.5) + 0.25 g(h; 12.5, 2.5) + 0.75 g(h; 19, 2)
//   g(h; mu, w) = exp(-((h - mu) / w)^2 / 2)
// scaled by a seasonal factor 1 + 0.2 cos(2 pi (day - 15) / 365) and by
// lognormal noise exp(sigma z - sigma^2 / 2), sigma = noise_level.
//
// PV shape: day length L = 12 + 4 sin(2 pi (day - 80) / 365) hours centred on
// 12.5 h; irradiance sin(pi (h - sunrise) / L)^1.5 during daylight, amplitude
// 0.6 + 0.4 sin(2 pi (day - 80) / 365), times a cloud factor shared by all PV
// units (with probability cloud_probability drawn uniform in [0.2, 1]).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "curtail/task.hpp"

namespace curtail {

struct ProfileConfig {
  int n_steps = 96;
  int start_day = 0;
  int day_stride = 1;               // days between consecutive simulated days
  double household_peak = 0.008;    // p.u. per load bus
  double pv_peak = 0.01;            // p.u. rooftop PV per PV-equipped load bus
  double plant_factor = 25.0;       // controllable plant capacity = plant_factor * pv_peak (capped by bus p_max)
  double rooftop_fraction = 0.5;    // share of load buses with rooftop PV
  double noise_level = 0.15;        // lognormal sigma of load noise
  double cloud_probability = 0.3;
  double load_power_factor = 0.95;  // inductive

  [[nodiscard]] nlohmann::json to_json() const;
  static ProfileConfig from_json(const nlohmann::json& j);
};

struct AugmentConfig {
  double bound_noise_sigma = 0.15;  // relative, truncated at +/- 2 sigma
  double lower_band_target_fraction = 0.0;
  int multiplier = 1;

  [[nodiscard]] nlohmann::json to_json() const;
  static AugmentConfig from_json(const nlohmann::json& j);
};

struct Dataset {
  std::uint64_t grid_hash = 0;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  Provenance provenance = Provenance::original;
  std::vector<SupplyTask> tasks;
  int non_physical = 0;  // tasks dropped because their power flow diverged
  int lower_band_replicas = 0;

  bool operator==(const Dataset&) const = default;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Diurnal household load shape (unitless, peak about 1).
[[nodiscard]] double load_shape(double hour);
/// Clear-sky PV shape for a day of the year, in [0, 1].
[[nodiscard]] double pv_shape(double hour, int day_of_year);

/// Unlabeled tasks; deterministic in (grid, config, seed) and independent of
/// evaluation order (each step draws from its own seeded stream).
[[nodiscard]] Dataset generate_profiles(const Grid& grid, const ProfileConfig& config, std::uint64_t seed);

/// Labels every task with its uncurtailed-state report. Divergent tasks are
/// removed and counted in Dataset::non_physical.
void label_violations(const Grid& grid, Dataset& dataset, double tol = kDefaultFeasibilityTol);

[[nodiscard]] Dataset augment(const Grid& grid, const Dataset& original, const AugmentConfig& config,
                              std::uint64_t seed);

struct Split {
  std::vector<SupplyTask> train;
  std::vector<SupplyTask> test;
};

[[nodiscard]] Split split(const Dataset& original, const Dataset& augmented);

/// JSON-lines: one header record, then one task per line.
void save_dataset(const Dataset& dataset, const Grid& grid, const std::filesystem::path& path);
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& path);

}  // namespace curtail
