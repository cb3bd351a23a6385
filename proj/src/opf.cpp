#include "curtail/opf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace curtail {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double polynomial(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

// Largest excess of any category; non-physical states rank worst.
double worst_excess(const ViolationReport& r) {
  if (r.non_physical) return std::numeric_limits<double>::infinity();
  return std::max({r.max_upper_voltage_excess, r.max_lower_voltage_excess, r.max_loading_excess, 0.0});
}

double squared_penalty(const Grid& grid, const PowerFlowSolution& pf) {
  double acc = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double hi = pf.v_mag[i] - grid.buses[i].v_max;
    const double lo = grid.buses[i].v_min - pf.v_mag[i];
    if (hi > 0) acc += hi * hi;
    if (lo > 0) acc += lo * lo;
  }
  for (double l : pf.loading)
    if (l > 1.0) acc += (l - 1.0) * (l - 1.0);
  return acc;
}

// Box-normalized decision vector: entries for every non-degenerate axis.
struct Axes {
  std::vector<double> lo;
  std::vector<double> width;
  std::vector<int> free;  // indices into the full 2k vector (p_1..p_k, q_1..q_k)

  explicit Axes(const SupplyTask& task) {
    const std::size_t k = task.flex.size();
    lo.resize(2 * k);
    width.resize(2 * k);
    for (std::size_t j = 0; j < k; ++j) {
      lo[j] = task.flex[j].p_min;
      width[j] = task.flex[j].p_width();
      lo[k + j] = task.flex[j].q_min;
      width[k + j] = task.flex[j].q_width();
    }
    for (std::size_t a = 0; a < 2 * k; ++a)
      if (width[a] > 0.0) free.push_back(static_cast<int>(a));
  }

  Setpoints to_setpoints(const std::vector<double>& full) const {
    const std::size_t k = lo.size() / 2;
    Setpoints sp;
    sp.p.assign(full.begin(), full.begin() + static_cast<long>(k));
    sp.q.assign(full.begin() + static_cast<long>(k), full.end());
    return sp;
  }
};

class PenaltyProblem {
 public:
  PenaltyProblem(const PowerFlowModel& model, const SupplyTask& task, const OpfOptions& opts)
      : model_(model), task_(task), opts_(opts), axes_(task) {
    const Setpoints ref = reference_setpoints(model.grid(), task);
    base_.resize(axes_.lo.size());
    const std::size_t k = task.flex.size();
    for (std::size_t j = 0; j < k; ++j) {
      base_[j] = std::clamp(ref.p[j], task.flex[j].p_min, task.flex[j].p_max);
      base_[k + j] = std::clamp(ref.q[j], task.flex[j].q_min, task.flex[j].q_max);
    }
  }

  [[nodiscard]] std::size_t dim() const { return axes_.free.size(); }

  std::vector<double> start() const {
    std::vector<double> z(dim());
    for (std::size_t d = 0; d < dim(); ++d) {
      const int a = axes_.free[d];
      z[d] = std::clamp((base_[a] - axes_.lo[a]) / axes_.width[a], 0.0, 1.0);
    }
    return z;
  }

  std::vector<double> full(const std::vector<double>& z) const {
    std::vector<double> x = base_;
    for (std::size_t d = 0; d < dim(); ++d) {
      const int a = axes_.free[d];
      x[a] = axes_.lo[a] + std::clamp(z[d], 0.0, 1.0) * axes_.width[a];
    }
    return x;
  }

  double operator()(const std::vector<double>& z, double weight) {
    const std::vector<double> x = full(z);
    const Setpoints sp = axes_.to_setpoints(x);
    const InjectionSet inj = task_injections(model_.grid(), task_, sp);
    PowerFlowOptions pf = opts_.pf;
    if (warm_) {
      pf.flat_start = false;
      pf.initial = warm_;
    }
    PowerFlowSolution sol = model_.solve(inj, pf);
    if (!sol.converged && warm_) sol = model_.solve(inj, opts_.pf);
    ++power_flows_;
    const ViolationReport rep = assess_state(model_.grid(), sol, opts_.feasibility_tol);
    const double cost = curtailment_cost(model_.grid(), sp.p);
    if (!sol.converged) {
      record(sp, cost, rep);
      return std::numeric_limits<double>::infinity();
    }
    warm_ = VoltageState{sol.v_mag, sol.v_ang};
    record(sp, cost, rep);
    return cost + weight * squared_penalty(model_.grid(), sol);
  }

  long power_flows() const { return power_flows_; }

  bool has_feasible() const { return best_feasible_.has_value(); }
  const auto& best_feasible() const { return *best_feasible_; }
  const auto& least_violating() const { return *least_violating_; }

  struct Candidate {
    Setpoints sp;
    double cost;
    ViolationReport report;
  };

 private:
  void record(const Setpoints& sp, double cost, const ViolationReport& rep) {
    if (!rep.has_violation) {
      if (!best_feasible_ || cost < best_feasible_->cost) best_feasible_ = Candidate{sp, cost, rep};
    }
    if (!least_violating_ || worst_excess(rep) < worst_excess(least_violating_->report))
      least_violating_ = Candidate{sp, cost, rep};
  }

  const PowerFlowModel& model_;
  const SupplyTask& task_;
  const OpfOptions& opts_;
  Axes axes_;
  std::vector<double> base_;
  std::optional<VoltageState> warm_;
  long power_flows_ = 0;
  std::optional<Candidate> best_feasible_;
  std::optional<Candidate> least_violating_;
};

// Central differences in normalized coordinates, one-sided at the box faces.
std::vector<double> fd_gradient(PenaltyProblem& f, const std::vector<double>& z, double fz, double weight,
                                double h) {
  std::vector<double> g(z.size(), 0.0);
  for (std::size_t d = 0; d < z.size(); ++d) {
    std::vector<double> zp = z, zm = z;
    zp[d] = std::min(1.0, z[d] + h);
    zm[d] = std::max(0.0, z[d] - h);
    const double fp = zp[d] > z[d] ? f(zp, weight) : fz;
    const double fm = zm[d] < z[d] ? f(zm, weight) : fz;
    const double span = zp[d] - zm[d];
    if (span <= 0.0) continue;
    if (std::isfinite(fp) && std::isfinite(fm))
      g[d] = (fp - fm) / span;
    else if (std::isfinite(fp) && zp[d] > z[d])
      g[d] = (fp - fz) / (zp[d] - z[d]);
    else if (std::isfinite(fm) && zm[d] < z[d])
      g[d] = (fz - fm) / (z[d] - zm[d]);
  }
  return g;
}

}  // namespace

double curtailment_cost(const Grid& grid, const std::vector<double>& p_set) {
  const auto ctrl = grid.controllable_buses();
  double total = 0.0;
  for (std::size_t k = 0; k < ctrl.size() && k < p_set.size(); ++k)
    total += polynomial(grid.buses[ctrl[k]].cost_coeffs, p_set[k]);
  return total;
}

OpfSolution solve_opf(const Grid& grid, const SupplyTask& task, const OpfOptions& opts) {
  return solve_opf(PowerFlowModel(grid), task, opts);
}

OpfSolution solve_opf(const PowerFlowModel& model, const SupplyTask& task, const OpfOptions& opts) {
  const auto t0 = Clock::now();
  check_task_shape(model.grid(), task);
  PenaltyProblem f(model, task, opts);

  std::vector<double> z = f.start();
  double weight = opts.initial_penalty;
  double fz = f(z, weight);

  for (int outer = 0; outer < opts.max_outer_iterations; ++outer) {
    if (outer > 0) {
      weight *= opts.penalty_growth;
      fz = f(z, weight);
    }
    if (f.dim() == 0 || !std::isfinite(fz)) break;
    double step = -1.0;
    for (int inner = 0; inner < opts.max_inner_iterations; ++inner) {
      const std::vector<double> g = fd_gradient(f, z, fz, weight, opts.fd_step);
      const double gmax = std::accumulate(g.begin(), g.end(), 0.0,
                                          [](double a, double b) { return std::max(a, std::abs(b)); });
      if (gmax == 0.0) break;
      if (step < 0.0) step = 0.25 / gmax;
      step *= 2.0;

      bool accepted = false;
      std::vector<double> trial(z.size());
      double ftrial = fz;
      double moved = 0.0;
      for (int halving = 0; halving < 60; ++halving) {
        double decrease = 0.0;
        moved = 0.0;
        for (std::size_t d = 0; d < z.size(); ++d) {
          trial[d] = std::clamp(z[d] - step * g[d], 0.0, 1.0);
          decrease += g[d] * (trial[d] - z[d]);
          moved = std::max(moved, std::abs(trial[d] - z[d]));
        }
        if (moved == 0.0) break;
        ftrial = f(trial, weight);
        if (std::isfinite(ftrial) && ftrial <= fz + 1e-4 * decrease) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      z = trial;
      fz = ftrial;
      if (moved < 1e-10) break;
    }
  }

  OpfSolution out;
  out.power_flows = f.power_flows();
  if (f.has_feasible()) {
    const auto& c = f.best_feasible();
    out.setpoints = c.sp;
    out.objective = c.cost;
    out.feasible = true;
    out.violation_report = c.report;
  } else {
    const auto& c = f.least_violating();
    out.setpoints = c.sp;
    out.objective = c.cost;
    out.feasible = false;
    out.violation_report = c.report;
    out.diagnostic = c.report.non_physical ? "power flow diverged at every trial point"
                                           : "no feasible setpoint found; returning least-violating iterate";
  }
  out.solve_time = elapsed(t0);
  return out;
}

OpfSolution brute_force_opf(const Grid& grid, const SupplyTask& task, int grid_points_per_axis,
                            double feasibility_tol) {
  const auto t0 = Clock::now();
  check_task_shape(grid, task);
  const std::size_t k = task.flex.size();
  if (k > 2) throw OpfError("brute force limited to k <= 2");
  if (grid_points_per_axis < 11) throw OpfError("brute force needs at least 11 grid points per axis");

  const PowerFlowModel model(grid);
  const Axes axes(task);
  const int n_axes = static_cast<int>(2 * k);
  // Degenerate axes hold a single point (every index maps to the same value).
  std::vector<int> points(n_axes);
  for (int a = 0; a < n_axes; ++a) points[a] = axes.width[a] > 0.0 ? grid_points_per_axis : 1;
  auto value = [&](int a, int idx) {
    if (points[a] == 1) return axes.lo[a];
    return axes.lo[a] + axes.width[a] * static_cast<double>(idx) / (grid_points_per_axis - 1);
  };

  auto decode = [](long flat, const std::vector<int>& dims, std::size_t first, std::size_t count) {
    std::vector<int> idx(count);
    for (std::size_t d = count; d-- > 0;) {
      idx[d] = static_cast<int>(flat % dims[first + d]);
      flat /= dims[first + d];
    }
    return idx;
  };

  long n_p = 1, n_q = 1;
  for (std::size_t j = 0; j < k; ++j) {
    n_p *= points[j];
    n_q *= points[k + j];
  }

  // Cost depends only on P: visit P-tuples in (cost, index) order and stop at
  // the first one admitting a feasible Q-tuple. The Q scan runs in index order,
  // so the result is the lexicographically smallest minimizer.
  std::vector<long> p_order(n_p);
  std::vector<double> p_cost(n_p);
  for (long ip = 0; ip < n_p; ++ip) {
    const auto idx = decode(ip, points, 0, k);
    std::vector<double> p(k);
    for (std::size_t j = 0; j < k; ++j) p[j] = value(static_cast<int>(j), idx[j]);
    p_cost[ip] = curtailment_cost(grid, p);
    p_order[ip] = ip;
  }
  std::stable_sort(p_order.begin(), p_order.end(), [&](long a, long b) { return p_cost[a] < p_cost[b]; });

  OpfSolution out;
  std::optional<PowerFlowSolution> least_sol;
  double least = std::numeric_limits<double>::infinity();
  Setpoints least_sp;
  ViolationReport least_rep;
  least_rep.non_physical = true;
  least_rep.has_violation = true;

  for (long ip : p_order) {
    const auto pidx = decode(ip, points, 0, k);
    std::optional<VoltageState> warm;
    for (long iq = 0; iq < n_q; ++iq) {
      const auto qidx = decode(iq, points, k, k);
      Setpoints sp;
      for (std::size_t j = 0; j < k; ++j) {
        sp.p.push_back(value(static_cast<int>(j), pidx[j]));
        sp.q.push_back(value(static_cast<int>(k + j), qidx[j]));
      }
      const InjectionSet inj = task_injections(grid, task, sp);
      PowerFlowOptions pf;
      if (warm) {
        pf.flat_start = false;
        pf.initial = warm;
      }
      PowerFlowSolution sol = model.solve(inj, pf);
      if (!sol.converged && warm) sol = model.solve(inj, {});
      ++out.power_flows;
      if (sol.converged) warm = VoltageState{sol.v_mag, sol.v_ang};
      const ViolationReport rep = assess_state(grid, sol, feasibility_tol);
      if (!rep.has_violation) {
        out.setpoints = sp;
        out.objective = p_cost[ip];
        out.feasible = true;
        out.violation_report = rep;
        out.solve_time = elapsed(t0);
        return out;
      }
      if (worst_excess(rep) < least) {
        least = worst_excess(rep);
        least_sp = sp;
        least_rep = rep;
      }
    }
  }

  out.setpoints = least_sp.p.empty() && k > 0 ? reference_setpoints(grid, task) : least_sp;
  out.objective = curtailment_cost(grid, out.setpoints.p);
  out.feasible = false;
  out.violation_report = least_rep;
  out.diagnostic = "no feasible grid point";
  out.solve_time = elapsed(t0);
  return out;
}

nlohmann::json to_json(const OpfSolution& s) {
  return {{"p_set", s.setpoints.p},
          {"q_set", s.setpoints.q},
          {"objective", s.objective},
          {"feasible", s.feasible},
          {"violation_report", to_json(s.violation_report)},
          {"solve_time", s.solve_time},
          {"power_flows", s.power_flows},
          {"diagnostic", s.diagnostic}};
}

}  // namespace curtail
