#pragma once

// Polar Newton-Raphson AC power flow. All generators and loads are PQ
// injections; the single slack bus is held at 1.0 p.u. and angle 0.

#include <optional>
#include <span>
#include <vector>

#include "curtail/admittance.hpp"
#include "curtail/grid.hpp"

namespace curtail {

/// Per-bus specified injections, generation positive. Slack entries are ignored.
struct InjectionSet {
  std::vector<double> p;
  std::vector<double> q;
};

struct VoltageState {
  std::vector<double> v_mag;
  std::vector<double> v_ang;
};

enum class LinearSolver { automatic, dense, sparse };

struct PowerFlowOptions {
  double tolerance = 1e-8;
  int max_iterations = 30;
  bool flat_start = true;
  /// Used when flat_start is false; flat start otherwise.
  std::optional<VoltageState> initial;
  LinearSolver solver = LinearSolver::automatic;
};

struct PowerFlowSolution {
  std::vector<double> v_mag;
  std::vector<double> v_ang;
  std::vector<Complex> s_from;
  std::vector<Complex> s_to;
  std::vector<double> loading;
  bool converged = false;
  bool singular_jacobian = false;
  int iterations = 0;
  double max_mismatch = 0.0;
};

struct Mismatch {
  std::vector<double> p;
  std::vector<double> q;
  /// Infinity norm over non-slack buses, both components.
  [[nodiscard]] double max_abs() const;
};

struct BranchFlows {
  std::vector<Complex> s_from;
  std::vector<Complex> s_to;
  std::vector<double> loading;
};

/// Precomputed network data for repeated solves on one grid. Immutable once
/// built; share freely between threads.
class PowerFlowModel {
 public:
  explicit PowerFlowModel(const Grid& grid);

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] const AdmittanceMatrix& admittance() const { return ybus_; }

  [[nodiscard]] PowerFlowSolution solve(const InjectionSet& inj, const PowerFlowOptions& opts = {}) const;

  /// Calculated complex injections S_bus(V) at every bus.
  void bus_injections(std::span<const double> v_mag, std::span<const double> v_ang, std::span<double> p_out,
                      std::span<double> q_out) const;

 private:
  struct Entry {
    int col;
    double g;
    double b;
  };

  void flows(std::span<const double> v_mag, std::span<const double> v_ang, PowerFlowSolution& sol) const;

  Grid grid_;
  AdmittanceMatrix ybus_;
  int slack_;
  std::vector<int> pq_;          // non-slack buses in id order
  std::vector<int> unknown_of_;  // bus -> position in pq_, -1 for slack
  std::vector<int> row_start_;   // CSR view of ybus_
  std::vector<Entry> entries_;
};

/// Convenience wrapper building a throwaway model.
[[nodiscard]] PowerFlowSolution solve_power_flow(const Grid& grid, const InjectionSet& inj,
                                                 const PowerFlowOptions& opts = {});

/// residual = calculated - specified; slack entries are reported as zero.
[[nodiscard]] Mismatch mismatch(const Grid& grid, const InjectionSet& inj, std::span<const double> v_mag,
                                std::span<const double> v_ang);

[[nodiscard]] BranchFlows branch_flows(const Grid& grid, std::span<const double> v_mag,
                                       std::span<const double> v_ang);

[[nodiscard]] InjectionSet zero_injections(const Grid& grid);

}  // namespace curtail
