#include "curtail/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "curtail/feasibility.hpp"

namespace curtail {

namespace {

constexpr int kStepsPerDay = 96;

// Independent stream per (seed, purpose, index) so that generation order
// does not matter.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double gauss_bump(double h, double mu, double w) {
  const double z = (h - mu) / w;
  return std::exp(-0.5 * z * z);
}

double truncated_normal(std::mt19937_64& rng, double limit) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const double z = n(rng);
    if (std::abs(z) <= limit) return z;
  }
}

std::vector<int> load_buses(const Grid& grid) {
  std::vector<int> out;
  for (const auto& b : grid.buses)
    if (b.kind != BusKind::slack && !b.controllable) out.push_back(b.id);
  return out;
}

}  // namespace

nlohmann::json ProfileConfig::to_json() const {
  return {{"n_steps", n_steps},
          {"start_day", start_day},
          {"day_stride", day_stride},
          {"household_peak", household_peak},
          {"pv_peak", pv_peak},
          {"plant_factor", plant_factor},
          {"rooftop_fraction", rooftop_fraction},
          {"noise_level", noise_level},
          {"cloud_probability", cloud_probability},
          {"load_power_factor", load_power_factor}};
}

ProfileConfig ProfileConfig::from_json(const nlohmann::json& j) {
  ProfileConfig c;
  c.n_steps = j.value("n_steps", c.n_steps);
  c.start_day = j.value("start_day", c.start_day);
  c.day_stride = j.value("day_stride", c.day_stride);
  c.household_peak = j.value("household_peak", c.household_peak);
  c.pv_peak = j.value("pv_peak", c.pv_peak);
  c.plant_factor = j.value("plant_factor", c.plant_factor);
  c.rooftop_fraction = j.value("rooftop_fraction", c.rooftop_fraction);
  c.noise_level = j.value("noise_level", c.noise_level);
  c.cloud_probability = j.value("cloud_probability", c.cloud_probability);
  c.load_power_factor = j.value("load_power_factor", c.load_power_factor);
  return c;
}

nlohmann::json AugmentConfig::to_json() const {
  return {{"bound_noise_sigma", bound_noise_sigma},
          {"lower_band_target_fraction", lower_band_target_fraction},
          {"multiplier", multiplier}};
}

AugmentConfig AugmentConfig::from_json(const nlohmann::json& j) {
  AugmentConfig c;
  c.bound_noise_sigma = j.value("bound_noise_sigma", c.bound_noise_sigma);
  c.lower_band_target_fraction = j.value("lower_band_target_fraction", c.lower_band_target_fraction);
  c.multiplier = j.value("multiplier", c.multiplier);
  return c;
}

double load_shape(double hour) {
  return 0.25 + 0.45 * gauss_bump(hour, 7.5, 1.5) + 0.25 * gauss_bump(hour, 12.5, 2.5) +
         0.75 * gauss_bump(hour, 19.0, 2.0);
}

double pv_shape(double hour, int day_of_year) {
  const double season = std::sin(2.0 * std::numbers::pi * (day_of_year - 80) / 365.0);
  const double day_length = 12.0 + 4.0 * season;
  const double sunrise = 12.5 - day_length / 2.0;
  const double x = (hour - sunrise) / day_length;
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double amplitude = 0.6 + 0.4 * season;
  return amplitude * std::pow(std::sin(std::numbers::pi * x), 1.5);
}

Dataset generate_profiles(const Grid& grid, const ProfileConfig& config, std::uint64_t seed) {
  if (config.n_steps < 1) throw ScenarioError("n_steps must be >= 1");
  if (!(config.household_peak > 0.0)) throw ScenarioError("household_peak must be positive");
  if (!(config.pv_peak >= 0.0) || !(config.plant_factor >= 0.0)) throw ScenarioError("pv peaks must be non-negative");
  if (config.noise_level < 0.0) throw ScenarioError("noise_level must be non-negative");
  if (config.day_stride < 1) throw ScenarioError("day_stride must be >= 1");
  if (!(config.load_power_factor > 0.0 && config.load_power_factor <= 1.0))
    throw ScenarioError("load_power_factor must be in (0, 1]");

  const int n = grid.size();
  const auto loads = load_buses(grid);
  const auto ctrl = grid.controllable_buses();
  const double tan_phi = std::tan(std::acos(config.load_power_factor));

  std::vector<char> has_rooftop(n, 0);
  {
    auto rng = stream(seed, 1, 0);
    std::bernoulli_distribution roof(std::clamp(config.rooftop_fraction, 0.0, 1.0));
    for (int b : loads) has_rooftop[b] = roof(rng) ? 1 : 0;
  }

  Dataset ds;
  ds.config = config.to_json();
  ds.seed = seed;
  ds.provenance = Provenance::original;
  ds.grid_hash = grid_hash(grid);
  ds.tasks.resize(config.n_steps);

  for (int t = 0; t < config.n_steps; ++t) {
    auto rng = stream(seed, 2, static_cast<std::uint64_t>(t));
    const int day = config.start_day + (t / kStepsPerDay) * config.day_stride;
    const int doy = day % 365;
    const double hour = (t % kStepsPerDay) / 4.0;

    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double cloud = 1.0;
    if (u01(rng) < config.cloud_probability) cloud = 0.2 + 0.8 * u01(rng);
    const double irradiance = pv_shape(hour, doy) * cloud;
    const double season = 1.0 + 0.2 * std::cos(2.0 * std::numbers::pi * (doy - 15) / 365.0);
    std::normal_distribution<double> z(0.0, 1.0);

    SupplyTask& task = ds.tasks[t];
    task.timestamp = static_cast<std::int64_t>(day) * kStepsPerDay + t % kStepsPerDay;
    task.provenance = Provenance::original;
    task.p_ref.assign(n, 0.0);
    task.q_ref.assign(n, 0.0);
    const double sigma = config.noise_level;
    for (int b : loads) {
      const double noise = std::exp(sigma * z(rng) - 0.5 * sigma * sigma);
      const double load = config.household_peak * load_shape(hour) * season * noise;
      const double pv = has_rooftop[b] ? config.pv_peak * irradiance : 0.0;
      task.p_ref[b] = pv - load;
      task.q_ref[b] = -load * tan_phi;
    }
    for (int b : ctrl) {
      const Bus& bus = grid.buses[b];
      const double avail =
          std::clamp(config.plant_factor * config.pv_peak * irradiance, bus.p_min, bus.p_max);
      const double q0 = std::clamp(0.0, bus.q_min, bus.q_max);
      task.flex.push_back({bus.p_min, avail, bus.q_min, bus.q_max});
      task.p_ref[b] = avail;
      task.q_ref[b] = q0;
    }
  }
  return ds;
}

void label_violations(const Grid& grid, Dataset& dataset, double tol) {
  const PowerFlowModel model(grid);
  std::vector<SupplyTask> kept;
  kept.reserve(dataset.tasks.size());
  for (auto& task : dataset.tasks) {
    const ViolationReport rep = check_feasibility(model, task, reference_setpoints(grid, task), tol);
    if (rep.non_physical) {
      ++dataset.non_physical;
      continue;
    }
    task.labels = rep;
    kept.push_back(std::move(task));
  }
  dataset.tasks = std::move(kept);
}

Dataset augment(const Grid& grid, const Dataset& original, const AugmentConfig& config, std::uint64_t seed) {
  if (config.multiplier < 1) throw ScenarioError("augmentation multiplier must be >= 1");
  if (config.bound_noise_sigma < 0.0) throw ScenarioError("bound_noise_sigma must be non-negative");
  if (config.lower_band_target_fraction < 0.0 || config.lower_band_target_fraction >= 1.0)
    throw ScenarioError("lower_band_target_fraction must be in [0, 1)");

  const auto ctrl = grid.controllable_buses();
  Dataset out;
  out.grid_hash = original.grid_hash;
  out.seed = seed;
  out.provenance = Provenance::augmented;
  out.config = {{"augment", config.to_json()}, {"source_seed", original.seed}, {"source_config", original.config}};

  const std::size_t n_src = original.tasks.size();
  out.tasks.reserve(n_src * config.multiplier);
  for (int rep = 0; rep < config.multiplier; ++rep) {
    for (std::size_t i = 0; i < n_src; ++i) {
      auto rng = stream(seed, 3, static_cast<std::uint64_t>(rep) * n_src + i);
      SupplyTask t = original.tasks[i];
      t.provenance = Provenance::augmented;
      t.labels.reset();
      for (std::size_t k = 0; k < t.flex.size(); ++k) {
        FlexBox& f = t.flex[k];
        const double z_hi = truncated_normal(rng, 2.0);
        const double z_lo = truncated_normal(rng, 2.0);
        double hi = f.p_max * (1.0 + config.bound_noise_sigma * z_hi);
        double lo = f.p_min * (1.0 + config.bound_noise_sigma * z_lo);
        hi = f.p_max >= 0.0 ? std::max(hi, 0.0) : std::min(hi, 0.0);
        lo = f.p_min >= 0.0 ? std::max(lo, 0.0) : std::min(lo, 0.0);
        f.p_max = hi;
        f.p_min = std::min(lo, hi);
        t.p_ref[ctrl[k]] = f.p_max;
      }
      out.tasks.push_back(std::move(t));
    }
  }
  label_violations(grid, out);

  // Replicate lower-band tasks until they make up the target share of the
  // violating tasks.
  const double target = config.lower_band_target_fraction;
  if (target > 0.0) {
    std::vector<std::size_t> sources;
    std::size_t violating = 0;
    for (std::size_t i = 0; i < out.tasks.size(); ++i) {
      const auto& l = *out.tasks[i].labels;
      if (l.has_violation) ++violating;
      if (l.lower_voltage) sources.push_back(i);
    }
    std::size_t lower = sources.size();
    if (!sources.empty()) {
      std::size_t next = 0;
      while (static_cast<double>(lower) < target * static_cast<double>(violating)) {
        out.tasks.push_back(out.tasks[sources[next]]);
        next = (next + 1) % sources.size();
        ++lower;
        ++violating;
        ++out.lower_band_replicas;
      }
    }
  }
  return out;
}

Split split(const Dataset& original, const Dataset& augmented) {
  if (!augmented.tasks.empty() && augmented.grid_hash != original.grid_hash)
    throw ScenarioError("original and augmented datasets come from different grids");
  Split s;
  for (const auto& t : original.tasks)
    if (t.provenance == Provenance::original) s.test.push_back(t);
  for (const auto& t : augmented.tasks)
    if (t.provenance == Provenance::augmented) s.train.push_back(t);
  return s;
}

void save_dataset(const Dataset& dataset, const Grid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write dataset " + path.string());
  const nlohmann::json header = {{"record", "header"},
                                 {"grid_hash", hash_hex(dataset.grid_hash)},
                                 {"config", dataset.config},
                                 {"seed", dataset.seed},
                                 {"provenance", provenance_name(dataset.provenance)},
                                 {"non_physical", dataset.non_physical},
                                 {"lower_band_replicas", dataset.lower_band_replicas},
                                 {"tasks", dataset.tasks.size()}};
  out << header.dump() << '\n';
  for (const auto& t : dataset.tasks) out << to_json(t, grid).dump() << '\n';
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open dataset " + path.string());
  Dataset ds;
  std::string line;
  bool header_seen = false;
  int lineno = 0;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      if (!header_seen) {
        if (j.value("record", "") != "header") throw ScenarioError("dataset is missing its header record");
        ds.grid_hash = std::stoull(j.at("grid_hash").get<std::string>(), nullptr, 16);
        ds.config = j.at("config");
        ds.seed = j.at("seed").get<std::uint64_t>();
        ds.provenance = parse_provenance(j.at("provenance").get<std::string>());
        ds.non_physical = j.value("non_physical", 0);
        ds.lower_band_replicas = j.value("lower_band_replicas", 0);
        header_seen = true;
        continue;
      }
      ds.tasks.push_back(task_from_json(j));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError("dataset line " + std::to_string(lineno) + ": " + e.what());
  }
  if (!header_seen) throw ScenarioError("empty dataset file " + path.string());
  return ds;
}

}  // namespace curtail
