#pragma once

// A supply task is one quarter-hour operating point of the grid.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "curtail/grid.hpp"
#include "curtail/power_flow.hpp"
#include "curtail/violation.hpp"

namespace curtail {

enum class Provenance { original, augmented };

[[nodiscard]] const char* provenance_name(Provenance p);
[[nodiscard]] Provenance parse_provenance(const std::string& s);

struct FlexBox {
  double p_min = 0.0;
  double p_max = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;

  [[nodiscard]] double p_width() const { return p_max - p_min; }
  [[nodiscard]] double q_width() const { return q_max - q_min; }
  bool operator==(const FlexBox&) const = default;
};

struct SupplyTask {
  std::int64_t timestamp = 0;  // quarter-hour index
  Provenance provenance = Provenance::original;
  std::vector<double> p_ref;  // per bus, uncurtailed
  std::vector<double> q_ref;
  std::vector<FlexBox> flex;  // per controllable bus, in Grid::controllable_buses() order
  std::optional<ViolationReport> labels;

  bool operator==(const SupplyTask&) const = default;
};

/// Controllable setpoints, same order as SupplyTask::flex.
struct Setpoints {
  std::vector<double> p;
  std::vector<double> q;

  bool operator==(const Setpoints&) const = default;
};

/// Setpoints equal to the task's uncurtailed references.
[[nodiscard]] Setpoints reference_setpoints(const Grid& grid, const SupplyTask& task);

/// Task injections with the controllable buses overridden by `sp`.
[[nodiscard]] InjectionSet task_injections(const Grid& grid, const SupplyTask& task, const Setpoints& sp);

/// Throws std::invalid_argument when the task does not fit the grid.
void check_task_shape(const Grid& grid, const SupplyTask& task);

[[nodiscard]] nlohmann::json to_json(const SupplyTask& t, const Grid& grid);
[[nodiscard]] SupplyTask task_from_json(const nlohmann::json& j);

}  // namespace curtail
