#pragma once

// Shared fixtures and independent reference computations for the tests.

#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "curtail/grid.hpp"
#include "curtail/power_flow.hpp"
#include "curtail/task.hpp"

namespace testing {

using curtail::Grid;
using cd = std::complex<double>;

inline Grid fixture_grid(const std::string& name) {
  return curtail::load_grid(std::string(CURTAIL_TEST_DATA) + "/" + name);
}

inline Grid feeder5() { return fixture_grid("feeder5.json"); }

/// Random radial feeder: bus 0 is the slack, every other bus hangs off an
/// earlier one. Bus n-1 is controllable and observable.
inline Grid random_feeder(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r(0.005, 0.05), x(0.005, 0.05);
  Grid g;
  for (int i = 0; i < n; ++i) {
    curtail::Bus b;
    b.id = i;
    b.kind = i == 0 ? curtail::BusKind::slack : curtail::BusKind::pq;
    g.buses.push_back(b);
  }
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> parent(std::max(0, i - 3), i - 1);
    g.lines.push_back({parent(rng), i, r(rng), x(rng), 0.0, 1.0});
  }
  auto& c = g.buses[n - 1];
  c.controllable = c.observable = true;
  c.p_min = 0.0;
  c.p_max = 0.2;
  c.q_min = -0.05;
  c.q_max = 0.05;
  c.cost_coeffs = {0.0, -1.0, 0.0};
  return g;
}

/// Admittance matrix assembled directly from the pi model.
inline std::vector<std::vector<cd>> dense_ybus(const Grid& g) {
  const int n = g.size();
  std::vector<std::vector<cd>> y(n, std::vector<cd>(n));
  for (const auto& l : g.lines) {
    const cd ys = 1.0 / cd(l.r, l.x);
    const cd sh(0.0, l.b_shunt / 2.0);
    y[l.from_bus][l.from_bus] += ys + sh;
    y[l.to_bus][l.to_bus] += ys + sh;
    y[l.from_bus][l.to_bus] -= ys;
    y[l.to_bus][l.from_bus] -= ys;
  }
  return y;
}

/// Gauss-Seidel power flow; slack bus 0 at 1.0 p.u. Returns complex voltages.
inline std::vector<cd> gauss_seidel(const Grid& g, const curtail::InjectionSet& inj, double tol = 1e-13,
                                    int max_sweeps = 200000) {
  const int n = g.size();
  const auto y = dense_ybus(g);
  const int slack = g.slack_bus();
  std::vector<cd> v(n, cd(1.0, 0.0));
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double delta = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i == slack) continue;
      cd sum = 0.0;
      for (int k = 0; k < n; ++k)
        if (k != i) sum += y[i][k] * v[k];
      const cd s(inj.p[i], inj.q[i]);
      const cd vi = (std::conj(s) / std::conj(v[i]) - sum) / y[i][i];
      delta = std::max(delta, std::abs(vi - v[i]));
      v[i] = vi;
    }
    if (delta < tol) return v;
  }
  return {};
}

/// Task with the given per-bus injections; controllable boxes from the grid
/// and references at the supplied injections.
inline curtail::SupplyTask make_task(const Grid& g, std::vector<double> p, std::vector<double> q) {
  curtail::SupplyTask t;
  t.p_ref = std::move(p);
  t.q_ref = std::move(q);
  for (int b : g.controllable_buses()) {
    const auto& bus = g.buses[b];
    t.flex.push_back({bus.p_min, bus.p_max, bus.q_min, bus.q_max});
  }
  return t;
}

}  // namespace testing
