#pragma once

// Held-out evaluation of a trained agent (and of the OPF on the same tasks).

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "curtail/opf.hpp"
#include "curtail/rl/checkpoint.hpp"

namespace curtail::harness {

struct CurtailmentRatio {
  std::optional<double> p;  // absent when the task has no active-power flexibility
  std::optional<double> q;
};

/// p = sum |p_ref - p_set| / sum |p_max - p_min|, q analogously on the q boxes.
[[nodiscard]] CurtailmentRatio relative_curtailment(const Grid& grid, const SupplyTask& task, const Setpoints& sp);

struct EvalRecord {
  std::string series;  // "rl" or "opf"
  int task = 0;        // index in the evaluated task list
  std::int64_t timestamp = 0;
  ViolationReport before;
  ViolationReport after;  // certified by an independent feasibility check
  bool resolved = false;
  double max_loading = 0.0;
  double min_voltage = 1.0;
  double max_voltage = 1.0;
  CurtailmentRatio ratio;
  double flexibility = 0.0;  // sum of active-power box widths, p.u.
  double seconds = 0.0;      // decision time; excluded from deterministic output

  [[nodiscard]] bool violating_before() const { return before.has_violation; }
  [[nodiscard]] bool nonzero_curtailment() const;
};

struct CategoryStats {
  int count = 0;
  int solved = 0;
  [[nodiscard]] std::optional<double> solved_percent() const;
};

struct SummaryTable {
  CategoryStats total;
  CategoryStats upper_voltage;
  CategoryStats lower_voltage;
  CategoryStats overload;
  int residual = 0;                       // violating tasks left unresolved
  int residual_with_curtailment = 0;      // of those, tasks with a nonzero action
  int clean_tasks = 0;                    // tasks without a violation before acting
  int unnecessary_curtailment = 0;        // clean tasks curtailed anyway
  std::optional<double> train_seconds;
  std::optional<double> inference_per_task;
  std::optional<double> opf_per_task;
};

[[nodiscard]] SummaryTable summarize(std::span<const EvalRecord> records);

struct EvalOptions {
  int threads = 1;
  double feasibility_tol = kDefaultFeasibilityTol;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Greedy rollouts of the checkpointed agent. Throws EvalError when the
/// checkpoint belongs to another grid. Records are ordered by task index.
[[nodiscard]] std::vector<EvalRecord> evaluate(const rl::Checkpoint& checkpoint, const Grid& grid,
                                               std::span<const SupplyTask> tasks, const EvalOptions& opts = {});

/// The same records for solve_opf; infeasible OPF runs count as unresolved.
[[nodiscard]] std::vector<EvalRecord> evaluate_opf(const Grid& grid, std::span<const SupplyTask> tasks,
                                                   const OpfOptions& opf = {}, const EvalOptions& opts = {});

/// Deterministic view: timing fields are omitted.
[[nodiscard]] nlohmann::json to_json(const EvalRecord& r);
[[nodiscard]] EvalRecord eval_record_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const SummaryTable& s, bool with_timing);

}  // namespace curtail::harness
