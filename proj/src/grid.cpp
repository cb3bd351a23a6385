#include "curtail/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>

namespace curtail {

namespace {

GridViolation bus_finding(std::string rule, int bus, const std::string& what) {
  return {std::move(rule), "bus " + std::to_string(bus) + ": " + what, bus, -1};
}

GridViolation line_finding(std::string rule, int line, const std::string& what) {
  return {std::move(rule), "line " + std::to_string(line) + ": " + what, -1, line};
}

std::string join_findings(const std::vector<GridViolation>& findings) {
  std::string out = "grid validation failed";
  for (const auto& f : findings) out += "; " + f.message;
  return out;
}

const char* kind_name(BusKind k) { return k == BusKind::slack ? "slack" : "pq"; }

BusKind parse_kind(const std::string& s) {
  if (s == "slack") return BusKind::slack;
  if (s == "pq") return BusKind::pq;
  throw GridError("parse error: unknown bus kind '" + s + "'");
}

}  // namespace

GridValidationError::GridValidationError(std::vector<GridViolation> findings)
    : GridError(join_findings(findings)), findings_(std::move(findings)) {}

int Grid::slack_bus() const {
  for (const auto& b : buses)
    if (b.kind == BusKind::slack) return b.id;
  return -1;
}

std::vector<int> Grid::controllable_buses() const {
  std::vector<int> ids;
  for (const auto& b : buses)
    if (b.controllable) ids.push_back(b.id);
  return ids;
}

std::vector<int> Grid::observable_buses() const {
  std::vector<int> ids;
  for (const auto& b : buses)
    if (b.observable) ids.push_back(b.id);
  return ids;
}

std::vector<GridViolation> validate(const Grid& grid) {
  std::vector<GridViolation> out;
  const int n = grid.size();

  if (!(grid.base_mva > 0.0)) out.push_back({"base_mva", "base_mva must be positive"});
  if (!(grid.base_kv > 0.0)) out.push_back({"base_kv", "base_kv must be positive"});
  if (n == 0) {
    out.push_back({"no_slack", "no slack bus (grid has no buses)"});
    return out;
  }

  int slack_count = 0;
  for (int i = 0; i < n; ++i) {
    const Bus& b = grid.buses[i];
    if (b.id != i)
      out.push_back(bus_finding("dense_ids", b.id, "bus ids must be dense 0..n-1 (found at position " +
                                                       std::to_string(i) + ")"));
    if (b.kind == BusKind::slack) ++slack_count;
    if (!(b.v_min < b.v_max)) out.push_back(bus_finding("v_bounds", b.id, "v_min must be < v_max"));
    if (!(b.p_min <= b.p_max)) out.push_back(bus_finding("p_bounds", b.id, "p_min must be <= p_max"));
    if (!(b.q_min <= b.q_max)) out.push_back(bus_finding("q_bounds", b.id, "q_min must be <= q_max"));
    if (b.controllable && !b.observable)
      out.push_back(bus_finding("controllable_observable", b.id,
                                "controllable bus must also be observable (controllable => observable)"));
    if (!b.controllable && (b.p_min != b.p_max || b.q_min != b.q_max))
      out.push_back(bus_finding("degenerate_flex", b.id,
                                "non-controllable bus must have p_min == p_max and q_min == q_max"));
    if (b.controllable && b.cost_coeffs.empty())
      out.push_back(bus_finding("cost_coeffs", b.id, "controllable bus needs cost coefficients"));
  }
  if (slack_count == 0) out.push_back({"no_slack", "no slack bus"});
  if (slack_count > 1) out.push_back({"multiple_slack", "more than one slack bus"});

  bool endpoints_ok = true;
  for (int l = 0; l < static_cast<int>(grid.lines.size()); ++l) {
    const Line& ln = grid.lines[l];
    if (ln.from_bus < 0 || ln.from_bus >= n || ln.to_bus < 0 || ln.to_bus >= n) {
      out.push_back(line_finding("line_endpoint", l, "endpoint out of range"));
      endpoints_ok = false;
      continue;
    }
    if (ln.from_bus == ln.to_bus) out.push_back(line_finding("self_loop", l, "from_bus == to_bus"));
    if (!(ln.r >= 0.0)) out.push_back(line_finding("line_r", l, "r must be >= 0"));
    if (ln.x == 0.0 || !std::isfinite(ln.x)) out.push_back(line_finding("line_x", l, "x must be nonzero"));
    if (!(ln.s_max > 0.0)) out.push_back(line_finding("line_s_max", l, "s_max must be > 0"));
  }

  if (slack_count >= 1 && endpoints_ok) {
    std::vector<std::vector<int>> adj(n);
    for (const auto& ln : grid.lines) {
      adj[ln.from_bus].push_back(ln.to_bus);
      adj[ln.to_bus].push_back(ln.from_bus);
    }
    std::vector<char> seen(n, 0);
    std::queue<int> frontier;
    const int slack = grid.slack_bus();
    if (slack >= 0 && slack < n) {
      seen[slack] = 1;
      frontier.push(slack);
    }
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      for (int v : adj[u])
        if (!seen[v]) {
          seen[v] = 1;
          frontier.push(v);
        }
    }
    for (int i = 0; i < n; ++i)
      if (!seen[i]) out.push_back(bus_finding("disconnected", i, "disconnected bus (not reachable from slack)"));
  }
  return out;
}

nlohmann::json grid_to_json(const Grid& grid) {
  nlohmann::json buses = nlohmann::json::array();
  for (const auto& b : grid.buses) {
    buses.push_back({{"id", b.id},
                     {"kind", kind_name(b.kind)},
                     {"v_min", b.v_min},
                     {"v_max", b.v_max},
                     {"observable", b.observable},
                     {"controllable", b.controllable},
                     {"p_min", b.p_min},
                     {"p_max", b.p_max},
                     {"q_min", b.q_min},
                     {"q_max", b.q_max},
                     {"cost_coeffs", b.cost_coeffs}});
  }
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& l : grid.lines) {
    lines.push_back({{"from_bus", l.from_bus},
                     {"to_bus", l.to_bus},
                     {"r", l.r},
                     {"x", l.x},
                     {"b_shunt", l.b_shunt},
                     {"s_max", l.s_max}});
  }
  return {{"base_mva", grid.base_mva}, {"base_kv", grid.base_kv}, {"buses", buses}, {"lines", lines}};
}

Grid grid_from_json(const nlohmann::json& doc) {
  Grid grid;
  try {
    grid.base_mva = doc.at("base_mva").get<double>();
    grid.base_kv = doc.at("base_kv").get<double>();
    for (const auto& jb : doc.at("buses")) {
      Bus b;
      b.id = jb.at("id").get<int>();
      b.kind = parse_kind(jb.at("kind").get<std::string>());
      b.v_min = jb.value("v_min", b.v_min);
      b.v_max = jb.value("v_max", b.v_max);
      b.observable = jb.value("observable", false);
      b.controllable = jb.value("controllable", false);
      b.p_min = jb.value("p_min", b.p_min);
      b.p_max = jb.value("p_max", b.p_max);
      b.q_min = jb.value("q_min", b.q_min);
      b.q_max = jb.value("q_max", b.q_max);
      if (jb.contains("cost_coeffs")) b.cost_coeffs = jb.at("cost_coeffs").get<std::vector<double>>();
      grid.buses.push_back(std::move(b));
    }
    for (const auto& jl : doc.at("lines")) {
      Line l;
      l.from_bus = jl.at("from_bus").get<int>();
      l.to_bus = jl.at("to_bus").get<int>();
      l.r = jl.at("r").get<double>();
      l.x = jl.at("x").get<double>();
      l.b_shunt = jl.value("b_shunt", 0.0);
      l.s_max = jl.at("s_max").get<double>();
      grid.lines.push_back(l);
    }
  } catch (const nlohmann::json::exception& e) {
    throw GridError(std::string("parse error: ") + e.what());
  }
  if (auto findings = validate(grid); !findings.empty()) throw GridValidationError(std::move(findings));
  return grid;
}

Grid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GridError("cannot open grid file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw GridError(std::string("parse error: ") + e.what());
  }
  return grid_from_json(doc);
}

void save_grid(const Grid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw GridError("cannot write grid file " + path.string());
  out << grid_to_json(grid).dump(2) << '\n';
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t grid_hash(const Grid& grid) { return fnv1a(grid_to_json(grid).dump()); }

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace curtail
