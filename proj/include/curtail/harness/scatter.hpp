#pragma once

#include <span>
#include <string>
#include <vector>

#include "curtail/harness/evaluate.hpp"

namespace curtail::harness {

enum class ScatterMode { loading_vs_p, vmin_vs_p, loading_vs_q };

[[nodiscard]] ScatterMode parse_scatter_mode(const std::string& s);
[[nodiscard]] const char* scatter_mode_name(ScatterMode m);

struct ScatterRow {
  std::string series;
  int task = 0;
  double x = 0.0;        // relative curtailment
  double y = 0.0;        // max loading or min voltage
  double flex_kw = 0.0;  // available active-power flexibility

  bool operator==(const ScatterRow&) const = default;
};

/// One row per violating task and series. Tasks without the relevant
/// flexibility are skipped. Throws std::invalid_argument on empty input.
[[nodiscard]] std::vector<ScatterRow> scatter_rows(std::span<const EvalRecord> records, ScatterMode mode,
                                                   double base_mva);

/// Header "series,task,x,y,flex_kw"; values printed with round-trip precision.
[[nodiscard]] std::string scatter_csv(std::span<const ScatterRow> rows);
[[nodiscard]] std::vector<ScatterRow> parse_scatter_csv(const std::string& csv);

}  // namespace curtail::harness
