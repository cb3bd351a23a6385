#pragma once

#include <json.hpp>

namespace curtail {

inline constexpr double kDefaultFeasibilityTol = 1e-4;

/// Excesses over the voltage band and the line ratings for one grid state.
/// Categories are non-exclusive.
struct ViolationReport {
  double max_upper_voltage_excess = 0.0;  // p.u. above v_max
  double max_lower_voltage_excess = 0.0;  // p.u. below v_min
  double max_loading_excess = 0.0;        // relative loading above 1
  double min_voltage = 1.0;
  double max_voltage = 1.0;
  double max_loading = 0.0;
  bool upper_voltage = false;
  bool lower_voltage = false;
  bool overload = false;
  bool non_physical = false;  // power flow did not converge
  bool has_violation = false;

  bool operator==(const ViolationReport&) const = default;
};

[[nodiscard]] nlohmann::json to_json(const ViolationReport& r);
[[nodiscard]] ViolationReport violation_report_from_json(const nlohmann::json& j);

}  // namespace curtail
