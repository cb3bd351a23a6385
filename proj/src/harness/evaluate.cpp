#include "curtail/harness/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

namespace curtail::harness {

namespace {

ViolationReport labels_of(const PowerFlowModel& model, const SupplyTask& t, double tol) {
  if (t.labels) return *t.labels;
  return check_feasibility(model, t, reference_setpoints(model.grid(), t), tol);
}

EvalRecord make_record(const PowerFlowModel& model, const SupplyTask& t, int index, const Setpoints& sp,
                       const char* series, double tol) {
  const Grid& grid = model.grid();
  EvalRecord r;
  r.series = series;
  r.task = index;
  r.timestamp = t.timestamp;
  r.before = labels_of(model, t, tol);
  r.after = check_feasibility(model, t, sp, tol);
  r.resolved = !r.after.has_violation;
  r.max_loading = r.after.max_loading;
  r.min_voltage = r.after.min_voltage;
  r.max_voltage = r.after.max_voltage;
  r.ratio = relative_curtailment(grid, t, sp);
  for (const auto& f : t.flex) r.flexibility += std::abs(f.p_width());
  return r;
}

// Runs body(i) for i in [0, n) on up to `threads` workers, each owning its
// own state from make_state().
template <class MakeState, class Body>
void parallel_for(std::size_t n, int threads, MakeState make_state, Body body) {
  const std::size_t workers = std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    auto state = make_state();
    for (std::size_t i = 0; i < n; ++i) body(state, i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        auto state = make_state();
        for (std::size_t i = w; i < n; i += workers) body(state, i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

CurtailmentRatio relative_curtailment(const Grid& grid, const SupplyTask& task, const Setpoints& sp) {
  const auto ctrl = grid.controllable_buses();
  double dp = 0.0, dq = 0.0, wp = 0.0, wq = 0.0;
  for (std::size_t k = 0; k < ctrl.size(); ++k) {
    dp += std::abs(task.p_ref[ctrl[k]] - sp.p[k]);
    dq += std::abs(task.q_ref[ctrl[k]] - sp.q[k]);
    wp += std::abs(task.flex[k].p_width());
    wq += std::abs(task.flex[k].q_width());
  }
  CurtailmentRatio r;
  if (wp > 0.0) r.p = std::min(dp / wp, 1.0);
  if (wq > 0.0) r.q = std::min(dq / wq, 1.0);
  return r;
}

bool EvalRecord::nonzero_curtailment() const { return ratio.p.value_or(0.0) > 0.0 || ratio.q.value_or(0.0) > 0.0; }

std::optional<double> CategoryStats::solved_percent() const {
  if (count == 0) return std::nullopt;
  return 100.0 * solved / count;
}

SummaryTable summarize(std::span<const EvalRecord> records) {
  SummaryTable s;
  for (const auto& r : records) {
    if (!r.violating_before()) {
      ++s.clean_tasks;
      if (r.ratio.p.value_or(0.0) > 0.0) ++s.unnecessary_curtailment;
      continue;
    }
    auto tally = [&](CategoryStats& c) {
      ++c.count;
      if (r.resolved) ++c.solved;
    };
    tally(s.total);
    if (r.before.upper_voltage) tally(s.upper_voltage);
    if (r.before.lower_voltage) tally(s.lower_voltage);
    if (r.before.overload) tally(s.overload);
    if (!r.resolved) {
      ++s.residual;
      if (r.nonzero_curtailment()) ++s.residual_with_curtailment;
    }
  }
  return s;
}

std::vector<EvalRecord> evaluate(const rl::Checkpoint& checkpoint, const Grid& grid,
                                 std::span<const SupplyTask> tasks, const EvalOptions& opts) {
  if (checkpoint.grid_hash != grid_hash(grid))
    throw EvalError("checkpoint grid hash " + hash_hex(checkpoint.grid_hash) + " does not match grid " +
                    hash_hex(grid_hash(grid)));
  rl::EnvConfig env_cfg;
  env_cfg.steps_per_task = checkpoint.config.steps_per_task;
  env_cfg.lambda = checkpoint.config.lambda;
  env_cfg.feasibility_tol = opts.feasibility_tol;
  const rl::CurtailmentEnv proto(grid, env_cfg);
  if (proto.observation_size() != checkpoint.agent.obs_dim || proto.action_size() != checkpoint.agent.act_dim)
    throw EvalError("checkpoint dimensions do not match the grid");

  const rl::Agent& agent = checkpoint.agent;
  const rl::Policy policy = [&agent](std::span<const double> o) { return rl::act(agent, o); };
  std::vector<EvalRecord> out(tasks.size());
  parallel_for(
      tasks.size(), opts.threads, [&] { return proto; },
      [&](rl::CurtailmentEnv& env, std::size_t i) {
        check_task_shape(grid, tasks[i]);
        const rl::Rollout ro = rl::greedy_rollout(env, tasks[i], policy);
        out[i] = make_record(env.model(), tasks[i], static_cast<int>(i), ro.final_setpoints, "rl",
                             opts.feasibility_tol);
        out[i].seconds = ro.decision_seconds;
      });
  return out;
}

std::vector<EvalRecord> evaluate_opf(const Grid& grid, std::span<const SupplyTask> tasks, const OpfOptions& opf,
                                     const EvalOptions& opts) {
  const PowerFlowModel proto(grid);
  std::vector<EvalRecord> out(tasks.size());
  parallel_for(
      tasks.size(), opts.threads, [&] { return proto; },
      [&](PowerFlowModel& model, std::size_t i) {
        check_task_shape(grid, tasks[i]);
        const auto before = labels_of(model, tasks[i], opts.feasibility_tol);
        OpfSolution sol;
        if (before.has_violation)
          sol = solve_opf(model, tasks[i], opf);
        else
          sol.setpoints = reference_setpoints(grid, tasks[i]);
        out[i] = make_record(model, tasks[i], static_cast<int>(i), sol.setpoints, "opf", opts.feasibility_tol);
        out[i].seconds = sol.solve_time;
      });
  return out;
}

nlohmann::json to_json(const EvalRecord& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"series", r.series},
          {"task", r.task},
          {"timestamp", r.timestamp},
          {"before", to_json(r.before)},
          {"after", to_json(r.after)},
          {"resolved", r.resolved},
          {"max_loading", r.max_loading},
          {"min_voltage", r.min_voltage},
          {"max_voltage", r.max_voltage},
          {"relative_p_curtailment", opt(r.ratio.p)},
          {"relative_q_curtailment", opt(r.ratio.q)},
          {"flexibility", r.flexibility}};
}

EvalRecord eval_record_from_json(const nlohmann::json& j) {
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
  };
  EvalRecord r;
  r.series = j.at("series").get<std::string>();
  r.task = j.at("task").get<int>();
  r.timestamp = j.at("timestamp").get<std::int64_t>();
  r.before = violation_report_from_json(j.at("before"));
  r.after = violation_report_from_json(j.at("after"));
  r.resolved = j.at("resolved").get<bool>();
  r.max_loading = j.at("max_loading").get<double>();
  r.min_voltage = j.at("min_voltage").get<double>();
  r.max_voltage = j.at("max_voltage").get<double>();
  r.ratio.p = opt("relative_p_curtailment");
  r.ratio.q = opt("relative_q_curtailment");
  r.flexibility = j.at("flexibility").get<double>();
  return r;
}

nlohmann::json to_json(const SummaryTable& s, bool with_timing) {
  auto cat = [](const CategoryStats& c) {
    const auto pct = c.solved_percent();
    return nlohmann::json{
        {"count", c.count}, {"solved", c.solved}, {"solved_percent", pct ? nlohmann::json(*pct) : nullptr}};
  };
  nlohmann::json j = {{"total", cat(s.total)},
                      {"upper_voltage", cat(s.upper_voltage)},
                      {"lower_voltage", cat(s.lower_voltage)},
                      {"overload", cat(s.overload)},
                      {"residual", s.residual},
                      {"residual_with_curtailment", s.residual_with_curtailment},
                      {"clean_tasks", s.clean_tasks},
                      {"unnecessary_curtailment", s.unnecessary_curtailment}};
  if (with_timing) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    j["timing"] = {{"train_seconds", opt(s.train_seconds)},
                   {"inference_per_task", opt(s.inference_per_task)},
                   {"opf_per_task", opt(s.opf_per_task)},
                   {"opf_with_state_estimation_per_task", nullptr}};
  }
  return j;
}

}  // namespace curtail::harness
