#include <doctest.h>

#include "curtail/opf.hpp"
#include "support.hpp"

using namespace curtail;

namespace {

// Loads at buses 1, 2, 4 and a PV injection at bus 3.
SupplyTask pv_task(const Grid& g, double pv, double load = 0.02) {
  SupplyTask t = testing::make_task(g, {0.0, -load, -load, pv, -load}, {0.0, -0.3 * load, -0.3 * load, 0.0, -0.3 * load});
  t.flex[0].p_max = pv;
  return t;
}

Grid two_bus(double r, double x) {
  Grid g;
  g.buses.resize(2);
  g.buses[0].kind = BusKind::slack;
  g.buses[1].id = 1;
  g.lines.push_back({0, 1, r, x, 0.0, 1.0});
  return g;
}

}  // namespace

TEST_CASE("cost polynomial") {
  const Grid g = testing::feeder5();
  CHECK(curtailment_cost(g, {0.2}) == doctest::Approx(-0.2 + 0.05 * 0.04));
}

TEST_CASE("violation-free task keeps the uncurtailed setpoints") {
  const Grid g = testing::feeder5();
  const SupplyTask t = pv_task(g, 0.05);
  REQUIRE_FALSE(check_feasibility(g, t, reference_setpoints(g, t)).has_violation);
  const auto sol = solve_opf(g, t);
  REQUIRE(sol.feasible);
  CHECK(sol.setpoints.p[0] == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(sol.objective == doctest::Approx(curtailment_cost(g, {0.05})));
}

TEST_CASE("overloaded PV line is relieved like brute force") {
  const Grid g = testing::feeder5();
  const SupplyTask t = pv_task(g, 0.28);
  const auto before = check_feasibility(g, t, reference_setpoints(g, t));
  REQUIRE(before.overload);
  const auto sol = solve_opf(g, t);
  REQUIRE(sol.feasible);
  const auto check = check_feasibility(g, t, sol.setpoints);
  CHECK_FALSE(check.has_violation);
  CHECK(check.max_loading <= 1.0 + 1e-4);
  const auto bf = brute_force_opf(g, t, 101);
  REQUIRE(bf.feasible);
  CHECK(sol.objective <= bf.objective + 0.02 * std::abs(bf.objective));
  CHECK(std::abs(sol.setpoints.p[0] - bf.setpoints.p[0]) <= 0.28 / 100.0 + 1e-9);
  // Coarse and fine brute-force grids agree within one coarse cell.
  const auto coarse = brute_force_opf(g, t, 11);
  CHECK(std::abs(coarse.setpoints.p[0] - bf.setpoints.p[0]) <= 0.28 / 10.0 + 1e-9);
}

TEST_CASE("violation that no setpoint fixes is reported infeasible") {
  const Grid g = testing::feeder5();
  // Heavy load far down the lateral: undervoltage that the PV bus cannot lift.
  SupplyTask t = testing::make_task(g, {0.0, -0.05, -0.05, 0.0, -0.3}, {0.0, -0.02, -0.02, 0.0, -0.12});
  t.flex[0].p_max = 0.02;
  const auto bf = brute_force_opf(g, t, 11);
  REQUIRE_FALSE(bf.feasible);
  const auto sol = solve_opf(g, t);
  CHECK_FALSE(sol.feasible);
  CHECK(sol.violation_report.has_violation);
  CHECK(sol.setpoints.p.size() == 1);
}

TEST_CASE("brute force preconditions") {
  std::mt19937_64 rng(2);
  Grid g = testing::random_feeder(6, rng);
  for (int b : {3, 4}) {
    g.buses[b].controllable = g.buses[b].observable = true;
    g.buses[b].p_max = 0.1;
    g.buses[b].cost_coeffs = {0.0, -1.0};
  }
  REQUIRE(g.controllable_buses().size() == 3);
  const SupplyTask t = testing::make_task(g, std::vector<double>(6, 0.0), std::vector<double>(6, 0.0));
  CHECK_THROWS_WITH_AS((void)brute_force_opf(g, t, 11), "brute force limited to k <= 2", OpfError);
  const Grid g5 = testing::feeder5();
  CHECK_THROWS_AS((void)brute_force_opf(g5, pv_task(g5, 0.1), 5), OpfError);
}

TEST_CASE("brute force returns the best vertex when nothing binds") {
  const Grid g = testing::feeder5();
  const SupplyTask t = pv_task(g, 0.05);
  const auto bf = brute_force_opf(g, t, 11);
  REQUIRE(bf.feasible);
  CHECK(bf.setpoints.p[0] == doctest::Approx(0.05));
  // Cost does not depend on Q, so the tie resolves to the first Q grid point.
  CHECK(bf.setpoints.q[0] == doctest::Approx(-0.1));
}

TEST_CASE("relaxing the binding rating never raises the optimum") {
  Grid g = testing::feeder5();
  const SupplyTask t = pv_task(g, 0.28);
  double previous = std::numeric_limits<double>::infinity();
  for (double rating : {0.12, 0.14, 0.16, 0.18, 0.2, 0.3}) {
    g.lines[2].s_max = rating;
    const auto sol = solve_opf(g, t);
    REQUIRE(sol.feasible);
    CHECK(sol.objective <= previous + 1e-6);
    previous = sol.objective;
  }
}

TEST_CASE("feasibility report on analytic two-bus states") {
  SUBCASE("lower band excess") {
    const Grid g = two_bus(0.02, 0.06);
    // Bisect the load that depresses |V2| to 0.93.
    double lo = 0.0, hi = 3.0;
    auto v_of = [](double p) {
      const double a = 1.0 - 2.0 * (0.02 * p + 0.06 * 0.4 * p);
      const double z2s2 = (0.02 * 0.02 + 0.06 * 0.06) * (p * p * 1.16);
      return std::sqrt((a + std::sqrt(a * a - 4.0 * z2s2)) / 2.0);
    };
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (v_of(mid) > 0.93 ? lo : hi) = mid;
    }
    const SupplyTask t = testing::make_task(g, {0.0, -lo}, {0.0, -0.4 * lo});
    const auto r = check_feasibility(g, t, Setpoints{});
    CHECK(r.lower_voltage);
    CHECK_FALSE(r.upper_voltage);
    CHECK(r.max_lower_voltage_excess == doctest::Approx(0.02).epsilon(1e-6));
  }
  SUBCASE("loading excess") {
    Grid g = two_bus(0.02, 0.06);
    const SupplyTask t = testing::make_task(g, {0.0, -0.3}, {0.0, -0.1});
    const auto pf = solve_power_flow(g, task_injections(g, t, {}));
    g.lines[0].s_max = std::max(std::abs(pf.s_from[0]), std::abs(pf.s_to[0])) / 1.25;
    const auto r = check_feasibility(g, t, Setpoints{});
    CHECK(r.overload);
    CHECK(r.max_loading_excess == doctest::Approx(0.25).epsilon(1e-9));
  }
  SUBCASE("zero injections") {
    const Grid g = testing::feeder5();
    const SupplyTask t = testing::make_task(g, std::vector<double>(5, 0.0), std::vector<double>(5, 0.0));
    CHECK_FALSE(check_feasibility(g, t, reference_setpoints(g, t)).has_violation);
  }
  SUBCASE("setpoints outside the box are rejected") {
    const Grid g = testing::feeder5();
    const SupplyTask t = pv_task(g, 0.1);
    CHECK_THROWS((void)check_feasibility(g, t, Setpoints{{0.2}, {0.0}}));
  }
}

TEST_CASE("two controllable buses against brute force") {
  Grid g = testing::feeder5();
  g.buses[4].controllable = g.buses[4].observable = true;
  g.buses[4].p_max = 0.1;
  g.buses[4].q_min = -0.05;
  g.buses[4].q_max = 0.05;
  g.buses[4].cost_coeffs = {0.0, -1.5, 0.0};
  SupplyTask t = testing::make_task(g, {0.0, -0.02, -0.02, 0.22, 0.1}, {0.0, -0.006, -0.006, 0.0, 0.0});
  t.flex[0].p_max = 0.22;
  REQUIRE(check_feasibility(g, t, reference_setpoints(g, t)).has_violation);
  const auto bf = brute_force_opf(g, t, 21);
  REQUIRE(bf.feasible);
  const auto sol = solve_opf(g, t);
  REQUIRE(sol.feasible);
  CHECK_FALSE(check_feasibility(g, t, sol.setpoints).has_violation);
  CHECK(sol.objective <= bf.objective + 0.02 * std::abs(bf.objective));
}

TEST_CASE("solution JSON carries the report") {
  const Grid g = testing::feeder5();
  const auto sol = solve_opf(g, pv_task(g, 0.28));
  const auto j = to_json(sol);
  CHECK(j.at("feasible").get<bool>() == sol.feasible);
  CHECK(j.at("p_set").size() == 1);
  CHECK(j.at("violation_report").contains("has_violation"));
}
