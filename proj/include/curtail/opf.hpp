#pragma once

// Cost-minimal curtailment subject to the AC network equations, the
// flexibility boxes, the voltage band and the line ratings.
//
// solve_opf works in the reduced space of controllable setpoints: the network
// equations are eliminated by a power flow per trial point and the band/rating
// limits enter as quadratic penalties with a growing weight.

#include <string>
#include <vector>

#include <json.hpp>

#include "curtail/feasibility.hpp"

namespace curtail {

struct OpfOptions {
  double initial_penalty = 1e2;
  double penalty_growth = 10.0;
  int max_outer_iterations = 6;
  int max_inner_iterations = 300;
  double feasibility_tol = kDefaultFeasibilityTol;
  /// Central-difference step in the box-normalized coordinates.
  double fd_step = 1e-6;
  PowerFlowOptions pf;
};

struct OpfSolution {
  Setpoints setpoints;  // p_set, q_set per controllable bus
  double objective = 0.0;
  bool feasible = false;
  ViolationReport violation_report;
  double solve_time = 0.0;  // seconds
  long power_flows = 0;
  std::string diagnostic;
};

/// Sum over controllable buses of the cost polynomial evaluated at p_set.
[[nodiscard]] double curtailment_cost(const Grid& grid, const std::vector<double>& p_set);

[[nodiscard]] OpfSolution solve_opf(const Grid& grid, const SupplyTask& task, const OpfOptions& opts = {});
[[nodiscard]] OpfSolution solve_opf(const PowerFlowModel& model, const SupplyTask& task,
                                    const OpfOptions& opts = {});

class OpfError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive search over the Cartesian grid of all controllable (P, Q)
/// boxes. Limited to at most two controllable buses; ties resolve to the
/// lexicographically smallest grid index in (p_1..p_k, q_1..q_k) order.
[[nodiscard]] OpfSolution brute_force_opf(const Grid& grid, const SupplyTask& task, int grid_points_per_axis,
                                          double feasibility_tol = kDefaultFeasibilityTol);

[[nodiscard]] nlohmann::json to_json(const OpfSolution& s);

}  // namespace curtail
