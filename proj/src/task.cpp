#include "curtail/task.hpp"

#include <stdexcept>

namespace curtail {

nlohmann::json to_json(const ViolationReport& r) {
  return {{"max_upper_voltage_excess", r.max_upper_voltage_excess},
          {"max_lower_voltage_excess", r.max_lower_voltage_excess},
          {"max_loading_excess", r.max_loading_excess},
          {"min_voltage", r.min_voltage},
          {"max_voltage", r.max_voltage},
          {"max_loading", r.max_loading},
          {"upper_voltage", r.upper_voltage},
          {"lower_voltage", r.lower_voltage},
          {"overload", r.overload},
          {"non_physical", r.non_physical},
          {"has_violation", r.has_violation}};
}

ViolationReport violation_report_from_json(const nlohmann::json& j) {
  ViolationReport r;
  r.max_upper_voltage_excess = j.at("max_upper_voltage_excess").get<double>();
  r.max_lower_voltage_excess = j.at("max_lower_voltage_excess").get<double>();
  r.max_loading_excess = j.at("max_loading_excess").get<double>();
  r.min_voltage = j.at("min_voltage").get<double>();
  r.max_voltage = j.at("max_voltage").get<double>();
  r.max_loading = j.at("max_loading").get<double>();
  r.upper_voltage = j.at("upper_voltage").get<bool>();
  r.lower_voltage = j.at("lower_voltage").get<bool>();
  r.overload = j.at("overload").get<bool>();
  r.non_physical = j.at("non_physical").get<bool>();
  r.has_violation = j.at("has_violation").get<bool>();
  return r;
}

const char* provenance_name(Provenance p) { return p == Provenance::original ? "original" : "augmented"; }

Provenance parse_provenance(const std::string& s) {
  if (s == "original") return Provenance::original;
  if (s == "augmented") return Provenance::augmented;
  throw std::invalid_argument("unknown provenance '" + s + "'");
}

void check_task_shape(const Grid& grid, const SupplyTask& task) {
  const auto n = static_cast<std::size_t>(grid.size());
  if (task.p_ref.size() != n || task.q_ref.size() != n)
    throw std::invalid_argument("task injection vectors do not match the grid size");
  if (task.flex.size() != grid.controllable_buses().size())
    throw std::invalid_argument("task flexibility boxes do not match the controllable buses");
}

Setpoints reference_setpoints(const Grid& grid, const SupplyTask& task) {
  Setpoints sp;
  for (int bus : grid.controllable_buses()) {
    sp.p.push_back(task.p_ref[bus]);
    sp.q.push_back(task.q_ref[bus]);
  }
  return sp;
}

InjectionSet task_injections(const Grid& grid, const SupplyTask& task, const Setpoints& sp) {
  InjectionSet inj{task.p_ref, task.q_ref};
  const auto ctrl = grid.controllable_buses();
  if (sp.p.size() != ctrl.size() || sp.q.size() != ctrl.size())
    throw std::invalid_argument("setpoint count does not match the controllable buses");
  for (std::size_t k = 0; k < ctrl.size(); ++k) {
    inj.p[ctrl[k]] = sp.p[k];
    inj.q[ctrl[k]] = sp.q[k];
  }
  return inj;
}

nlohmann::json to_json(const SupplyTask& t, const Grid& grid) {
  nlohmann::json flex = nlohmann::json::array();
  const auto ctrl = grid.controllable_buses();
  for (std::size_t k = 0; k < t.flex.size(); ++k) {
    const FlexBox& f = t.flex[k];
    flex.push_back({{"bus", k < ctrl.size() ? ctrl[k] : -1},
                    {"p_min", f.p_min},
                    {"p_max", f.p_max},
                    {"q_min", f.q_min},
                    {"q_max", f.q_max}});
  }
  nlohmann::json j = {{"timestamp", t.timestamp},
                      {"provenance", provenance_name(t.provenance)},
                      {"p_ref", t.p_ref},
                      {"q_ref", t.q_ref},
                      {"flex", flex}};
  j["labels"] = t.labels ? to_json(*t.labels) : nlohmann::json(nullptr);
  return j;
}

SupplyTask task_from_json(const nlohmann::json& j) {
  SupplyTask t;
  t.timestamp = j.at("timestamp").get<std::int64_t>();
  t.provenance = parse_provenance(j.at("provenance").get<std::string>());
  t.p_ref = j.at("p_ref").get<std::vector<double>>();
  t.q_ref = j.at("q_ref").get<std::vector<double>>();
  for (const auto& jf : j.at("flex")) {
    t.flex.push_back({jf.at("p_min").get<double>(), jf.at("p_max").get<double>(), jf.at("q_min").get<double>(),
                      jf.at("q_max").get<double>()});
  }
  if (j.contains("labels") && !j.at("labels").is_null()) t.labels = violation_report_from_json(j.at("labels"));
  return t;
}

}  // namespace curtail
