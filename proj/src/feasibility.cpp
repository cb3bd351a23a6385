#include "curtail/feasibility.hpp"

#include <algorithm>
#include <stdexcept>

namespace curtail {

ViolationReport assess_state(const Grid& grid, const PowerFlowSolution& pf, double tol) {
  ViolationReport r;
  if (!pf.converged) {
    r.non_physical = true;
    r.has_violation = true;
    r.min_voltage = 0.0;
    r.max_voltage = 0.0;
    return r;
  }
  r.min_voltage = pf.v_mag.empty() ? 1.0 : pf.v_mag.front();
  r.max_voltage = r.min_voltage;
  for (int i = 0; i < grid.size(); ++i) {
    const double v = pf.v_mag[i];
    r.min_voltage = std::min(r.min_voltage, v);
    r.max_voltage = std::max(r.max_voltage, v);
    r.max_upper_voltage_excess = std::max(r.max_upper_voltage_excess, v - grid.buses[i].v_max);
    r.max_lower_voltage_excess = std::max(r.max_lower_voltage_excess, grid.buses[i].v_min - v);
  }
  for (double l : pf.loading) {
    r.max_loading = std::max(r.max_loading, l);
    r.max_loading_excess = std::max(r.max_loading_excess, l - 1.0);
  }
  r.upper_voltage = r.max_upper_voltage_excess > tol;
  r.lower_voltage = r.max_lower_voltage_excess > tol;
  r.overload = r.max_loading_excess > tol;
  r.has_violation = r.upper_voltage || r.lower_voltage || r.overload;
  return r;
}

ViolationReport check_feasibility(const PowerFlowModel& model, const SupplyTask& task, const Setpoints& sp,
                                  double tol, const PowerFlowOptions& pf_opts) {
  const Grid& grid = model.grid();
  check_task_shape(grid, task);
  constexpr double slack = 1e-9;
  for (std::size_t k = 0; k < task.flex.size(); ++k) {
    const FlexBox& f = task.flex[k];
    if (sp.p[k] < f.p_min - slack || sp.p[k] > f.p_max + slack || sp.q[k] < f.q_min - slack ||
        sp.q[k] > f.q_max + slack)
      throw std::invalid_argument("setpoint outside its flexibility box");
  }
  return assess_state(grid, model.solve(task_injections(grid, task, sp), pf_opts), tol);
}

ViolationReport check_feasibility(const Grid& grid, const SupplyTask& task, const Setpoints& sp, double tol) {
  return check_feasibility(PowerFlowModel(grid), task, sp, tol);
}

}  // namespace curtail
