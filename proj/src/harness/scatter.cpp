#include "curtail/harness/scatter.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace curtail::harness {

ScatterMode parse_scatter_mode(const std::string& s) {
  if (s == "loading_vs_p") return ScatterMode::loading_vs_p;
  if (s == "vmin_vs_p") return ScatterMode::vmin_vs_p;
  if (s == "loading_vs_q") return ScatterMode::loading_vs_q;
  throw std::invalid_argument("unknown scatter mode '" + s + "'");
}

const char* scatter_mode_name(ScatterMode m) {
  switch (m) {
    case ScatterMode::loading_vs_p:
      return "loading_vs_p";
    case ScatterMode::vmin_vs_p:
      return "vmin_vs_p";
    case ScatterMode::loading_vs_q:
      return "loading_vs_q";
  }
  return "?";
}

std::vector<ScatterRow> scatter_rows(std::span<const EvalRecord> records, ScatterMode mode, double base_mva) {
  if (records.empty()) throw std::invalid_argument("no evaluation records");
  std::vector<ScatterRow> rows;
  for (const auto& r : records) {
    if (!r.violating_before()) continue;
    const auto& x = mode == ScatterMode::loading_vs_q ? r.ratio.q : r.ratio.p;
    if (!x) continue;
    rows.push_back({r.series, r.task, *x, mode == ScatterMode::vmin_vs_p ? r.min_voltage : r.max_loading,
                    r.flexibility * base_mva * 1000.0});
  }
  return rows;
}

std::string scatter_csv(std::span<const ScatterRow> rows) {
  std::string s = "series,task,x,y,flex_kw\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%d,%.17g,%.17g,%.17g\n", r.task, r.x, r.y, r.flex_kw);
    s += r.series;
    s += buf;
  }
  return s;
}

std::vector<ScatterRow> parse_scatter_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "series,task,x,y,flex_kw")
    throw std::invalid_argument("unexpected scatter CSV header");
  std::vector<ScatterRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream f(line);
    std::string field;
    std::vector<std::string> v;
    while (std::getline(f, field, ',')) v.push_back(field);
    if (v.size() != 5) throw std::invalid_argument("malformed scatter row: " + line);
    rows.push_back({v[0], std::stoi(v[1]), std::stod(v[2]), std::stod(v[3]), std::stod(v[4])});
  }
  return rows;
}

}  // namespace curtail::harness
