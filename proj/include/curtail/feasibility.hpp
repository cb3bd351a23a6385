#pragma once

#include "curtail/power_flow.hpp"
#include "curtail/task.hpp"
#include "curtail/violation.hpp"

namespace curtail {

/// Grades a solved grid state against the voltage band and line ratings.
/// A non-converged solution is reported as non-physical (and violating).
[[nodiscard]] ViolationReport assess_state(const Grid& grid, const PowerFlowSolution& pf,
                                           double tol = kDefaultFeasibilityTol);

/// Runs a power flow with the given controllable setpoints and grades it.
[[nodiscard]] ViolationReport check_feasibility(const PowerFlowModel& model, const SupplyTask& task,
                                                const Setpoints& sp, double tol = kDefaultFeasibilityTol,
                                                const PowerFlowOptions& pf_opts = {});
[[nodiscard]] ViolationReport check_feasibility(const Grid& grid, const SupplyTask& task, const Setpoints& sp,
                                                double tol = kDefaultFeasibilityTol);

}  // namespace curtail
