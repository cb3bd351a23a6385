#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "curtail/feasibility.hpp"
#include "curtail/feeder.hpp"
#include "curtail/scenario.hpp"
#include "support.hpp"

using namespace curtail;

namespace {

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

Dataset labeled_year(const Grid& g, std::uint64_t seed, int n_steps = 96 * 24) {
  ProfileConfig c;
  c.n_steps = n_steps;
  c.day_stride = 15;
  Dataset d = generate_profiles(g, c, seed);
  label_violations(g, d);
  return d;
}

}  // namespace

TEST_CASE("load shape ordering") {
  CHECK(load_shape(0.0) < load_shape(12.0));
  CHECK(load_shape(12.0) < load_shape(19.0));
  CHECK(pv_shape(0.0, 172) == 0.0);
  CHECK(pv_shape(12.5, 172) > pv_shape(12.5, 355));
  for (double h = 0.0; h < 24.0; h += 0.25) {
    CHECK(pv_shape(h, 100) >= 0.0);
    CHECK(pv_shape(h, 100) <= 1.0);
  }
}

TEST_CASE("one day without PV follows the load shape") {
  const Grid g = testing::feeder5();
  ProfileConfig c;
  c.pv_peak = 0.0;
  c.noise_level = 0.0;
  const Dataset d = generate_profiles(g, c, 1);
  REQUIRE(d.tasks.size() == 96);
  for (const auto& t : d.tasks) {
    CHECK(t.p_ref[3] == 0.0);
    CHECK(t.flex[0].p_max == 0.0);
  }
  const auto& midnight = d.tasks[0];
  const auto& midday = d.tasks[48];
  const auto& evening = d.tasks[76];
  CHECK(-midnight.p_ref[1] < -midday.p_ref[1]);
  CHECK(-midday.p_ref[1] < -evening.p_ref[1]);
  // Fixed inductive power factor.
  CHECK(evening.q_ref[1] / evening.p_ref[1] == doctest::Approx(std::tan(std::acos(0.95))));
}

TEST_CASE("invalid profile configuration") {
  const Grid g = testing::feeder5();
  ProfileConfig c;
  c.household_peak = 0.0;
  CHECK_THROWS_AS((void)generate_profiles(g, c, 1), ScenarioError);
  c = {};
  c.pv_peak = -0.1;
  CHECK_THROWS_AS((void)generate_profiles(g, c, 1), ScenarioError);
  c = {};
  c.n_steps = 0;
  CHECK_THROWS_AS((void)generate_profiles(g, c, 1), ScenarioError);
}

TEST_CASE("generation is deterministic and order independent") {
  const Grid g = testing::feeder5();
  ProfileConfig c;
  c.n_steps = 192;
  const Dataset a = generate_profiles(g, c, 42);
  const Dataset b = generate_profiles(g, c, 42);
  CHECK(a == b);
  CHECK_FALSE(a == generate_profiles(g, c, 43));
  // A shorter run is a prefix of the longer one.
  c.n_steps = 100;
  const Dataset prefix = generate_profiles(g, c, 42);
  for (std::size_t i = 0; i < prefix.tasks.size(); ++i) CHECK(prefix.tasks[i] == a.tasks[i]);
}

TEST_CASE("high PV produces violations on the fixture") {
  const Grid g = testing::feeder5();
  ProfileConfig c;
  c.start_day = 172;
  c.cloud_probability = 0.0;
  c.pv_peak = 0.012;
  Dataset d = generate_profiles(g, c, 3);
  label_violations(g, d);
  int flagged = 0;
  for (const auto& t : d.tasks) flagged += t.labels->upper_voltage || t.labels->overload;
  CHECK(flagged > 0);
}

TEST_CASE("labels agree with an independent feasibility check") {
  const Grid g = make_feeder({}, 3);
  const Dataset d = labeled_year(g, 8, 960);
  bool both = false;
  for (const auto& t : d.tasks) {
    REQUIRE(t.labels);
    CHECK(*t.labels == check_feasibility(g, t, reference_setpoints(g, t)));
    both |= t.labels->overload && t.labels->upper_voltage;
  }
  CHECK(both);
}

TEST_CASE("divergent tasks are dropped and counted") {
  const Grid g = testing::feeder5();
  Dataset d;
  d.tasks.push_back(testing::make_task(g, {0, -0.01, -0.01, 0, -0.01}, {0, 0, 0, 0, 0}));
  d.tasks.push_back(testing::make_task(g, {0, -20, -20, 0, -20}, {0, -5, -5, 0, -5}));
  label_violations(g, d);
  CHECK(d.tasks.size() == 1);
  CHECK(d.non_physical == 1);
}

TEST_CASE("two-bus heavy load is labeled lower band") {
  Grid g;
  g.buses.resize(2);
  g.buses[0].kind = BusKind::slack;
  g.buses[1].id = 1;
  g.lines.push_back({0, 1, 0.02, 0.06, 0.0, 5.0});
  Dataset d;
  d.tasks.push_back(testing::make_task(g, {0.0, -1.2}, {0.0, -0.48}));
  d.tasks.push_back(testing::make_task(g, {0.0, 0.0}, {0.0, 0.0}));
  label_violations(g, d);
  REQUIRE(d.tasks.size() == 2);
  CHECK(d.tasks[0].labels->lower_voltage);
  CHECK_FALSE(d.tasks[1].labels->has_violation);
}

TEST_CASE("augmentation") {
  const Grid g = make_feeder({}, 3);
  const Dataset original = labeled_year(g, 8);
  const auto ctrl = g.controllable_buses();

  SUBCASE("zero noise only moves p_ref to p_max") {
    AugmentConfig c;
    c.bound_noise_sigma = 0.0;
    const Dataset aug = augment(g, original, c, 1);
    REQUIRE(aug.tasks.size() == original.tasks.size());
    for (std::size_t i = 0; i < aug.tasks.size(); ++i) {
      CHECK(aug.tasks[i].flex == original.tasks[i].flex);
      CHECK(aug.tasks[i].provenance == Provenance::augmented);
      for (std::size_t k = 0; k < ctrl.size(); ++k) CHECK(aug.tasks[i].p_ref[ctrl[k]] == aug.tasks[i].flex[k].p_max);
    }
  }
  SUBCASE("noisy bounds keep their order and sign") {
    AugmentConfig c;
    c.multiplier = 3;
    const Dataset aug = augment(g, original, c, 2);
    CHECK(aug.tasks.size() + aug.non_physical == 3 * original.tasks.size());
    for (const auto& t : aug.tasks) {
      for (std::size_t k = 0; k < ctrl.size(); ++k) {
        CHECK(t.flex[k].p_min <= t.flex[k].p_max);
        CHECK(t.flex[k].p_min >= 0.0);
        CHECK(t.p_ref[ctrl[k]] == t.flex[k].p_max);
      }
      CHECK(t.labels);
    }
    CHECK(aug == augment(g, original, c, 2));
  }
  SUBCASE("lower band share reaches the target") {
    AugmentConfig c;
    c.lower_band_target_fraction = 0.2;
    const Dataset aug = augment(g, original, c, 3);
    int violating = 0, lower = 0;
    for (const auto& t : aug.tasks) {
      violating += t.labels->has_violation;
      lower += t.labels->lower_voltage;
    }
    REQUIRE(violating > 0);
    CHECK(static_cast<double>(lower) >= 0.2 * violating);
  }
  SUBCASE("invalid configuration") {
    AugmentConfig c;
    c.multiplier = 0;
    CHECK_THROWS_AS((void)augment(g, original, c, 1), ScenarioError);
  }
}

TEST_CASE("split by provenance") {
  const Grid g = testing::feeder5();
  ProfileConfig pc;
  Dataset original = generate_profiles(g, pc, 1);
  label_violations(g, original);
  AugmentConfig ac;
  ac.multiplier = 3;
  const Dataset aug = augment(g, original, ac, 2);
  const Split s = split(original, aug);
  CHECK(s.test.size() == 96 - static_cast<std::size_t>(original.non_physical));
  CHECK(s.train.size() == 288 - static_cast<std::size_t>(aug.non_physical));
  for (const auto& t : s.train) CHECK(t.provenance == Provenance::augmented);
  for (const auto& t : s.test) CHECK(t.provenance == Provenance::original);
  const Split empty = split(original, Dataset{original.grid_hash});
  CHECK(empty.train.empty());
  CHECK(empty.test.size() == original.tasks.size());
}

TEST_CASE("dataset files round trip byte for byte") {
  const Grid g = testing::feeder5();
  Dataset d = generate_profiles(g, {}, 5);
  label_violations(g, d);
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = dir / "curtail_ds_a.jsonl", b = dir / "curtail_ds_b.jsonl";
  save_dataset(d, g, a);
  const Dataset back = load_dataset(a);
  CHECK(back == d);
  save_dataset(back, g, b);
  CHECK(file_bytes(a) == file_bytes(b));
  {
    std::ofstream f(b);
    f << R"({"record":"task"})" << "\n";
  }
  CHECK_THROWS_AS((void)load_dataset(b), ScenarioError);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}
