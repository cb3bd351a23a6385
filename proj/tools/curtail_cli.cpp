// curtail: command-line front end for the grid curtailment toolkit.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "curtail/feeder.hpp"
#include "curtail/grid.hpp"
#include "curtail/harness/bench.hpp"
#include "curtail/harness/evaluate.hpp"
#include "curtail/harness/scatter.hpp"
#include "curtail/opf.hpp"
#include "curtail/rl/checkpoint.hpp"
#include "curtail/rl/train.hpp"
#include "curtail/scenario.hpp"

using namespace curtail;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string grid;
  std::uint64_t seed = 1;
  std::string config;
  std::string out;
};

json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  json j;
  f >> j;
  return j;
}

// A config file may hold several sections; a command reads its own section
// when present and the whole document otherwise.
json config_section(const Globals& g, const char* name) {
  if (g.config.empty()) return json::object();
  json j = read_json(g.config);
  if (j.contains(name)) return j.at(name);
  return j;
}

Grid require_grid(const Globals& g) {
  if (g.grid.empty()) throw UsageError("--grid is required");
  return load_grid(g.grid);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string require_out(const Globals& g) {
  if (g.out.empty()) throw UsageError("--out is required");
  return g.out;
}

FeederOptions feeder_options(const json& j) {
  FeederOptions o;
  o.buses = j.value("buses", o.buses);
  o.controllable_share = j.value("controllable_share", o.controllable_share);
  o.transformer_r = j.value("transformer_r", o.transformer_r);
  o.transformer_x = j.value("transformer_x", o.transformer_x);
  o.transformer_rating = j.value("transformer_rating", o.transformer_rating);
  o.segment_r = j.value("segment_r", o.segment_r);
  o.segment_x = j.value("segment_x", o.segment_x);
  o.trunk_rating = j.value("trunk_rating", o.trunk_rating);
  o.lateral_rating = j.value("lateral_rating", o.lateral_rating);
  o.lateral_share = j.value("lateral_share", o.lateral_share);
  o.plant_rating = j.value("plant_rating", o.plant_rating);
  o.plant_q_share = j.value("plant_q_share", o.plant_q_share);
  o.length_jitter = j.value("length_jitter", o.length_jitter);
  return o;
}

std::vector<SupplyTask> load_tasks(const std::vector<std::string>& paths, const Grid& grid) {
  std::vector<SupplyTask> tasks;
  const auto h = grid_hash(grid);
  for (const auto& p : paths) {
    Dataset ds = load_dataset(p);
    if (ds.grid_hash != h) throw std::runtime_error(p + " was generated for a different grid");
    for (auto& t : ds.tasks) {
      check_task_shape(grid, t);
      tasks.push_back(std::move(t));
    }
  }
  return tasks;
}

int fail(const char* kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curative curtailment toolkit: grids, datasets, agent training and evaluation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--grid", g.grid, "Grid JSON file");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--config", g.config, "JSON configuration file");
  app.add_option("--out", g.out, "Output path");

  auto* feeder = app.add_subcommand("feeder", "Write a synthetic radial low-voltage feeder");
  auto* generate = app.add_subcommand("generate", "Generate supply tasks from synthetic load and PV profiles");
  bool gen_label = false;
  generate->add_flag("--label", gen_label, "Label the tasks right away");

  std::string in_path;
  auto* label = app.add_subcommand("label", "Label tasks with their uncurtailed violations");
  label->add_option("--in", in_path, "Dataset to label")->required();
  auto* augment = app.add_subcommand("augment", "Derive augmented training tasks from a labeled dataset");
  augment->add_option("--in", in_path, "Labeled original dataset")->required();

  std::vector<std::string> data;
  std::string metrics_path, timing_path, checkpoint_path;
  bool include_original = false;
  auto* train = app.add_subcommand("train", "Train an agent");
  train->add_option("--data", data, "Training datasets")->required();
  train->add_option("--metrics", metrics_path, "Metrics CSV output");
  train->add_option("--timing", timing_path, "Wall-clock timing JSON output");
  train->add_flag("--include-original", include_original, "Also train on original-provenance tasks");

  int threads = 1;
  bool with_opf = false;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on held-out tasks");
  eval->add_option("--checkpoint", checkpoint_path, "Agent checkpoint")->required();
  eval->add_option("--data", data, "Test datasets")->required();
  eval->add_option("--threads", threads, "Worker threads");
  eval->add_flag("--opf", with_opf, "Also evaluate the OPF on the same tasks");
  eval->add_option("--timing", timing_path, "Wall-clock timing JSON output");

  std::optional<int> task_index;
  auto* opf = app.add_subcommand("opf", "Solve the curtailment OPF");
  opf->add_option("--data", data, "Datasets")->required();
  opf->add_option("--task", task_index, "Single task index (default: every violating task)");

  int reps = 5;
  std::string train_timing;
  auto* bench = app.add_subcommand("bench", "Time agent inference against the OPF");
  bench->add_option("--checkpoint", checkpoint_path, "Agent checkpoint")->required();
  bench->add_option("--data", data, "Datasets")->required();
  bench->add_option("--repetitions", reps, "Repetitions (>= 5)");
  bench->add_option("--train-timing", train_timing, "Timing JSON written by train");

  std::string mode = "loading_vs_p";
  auto* scatter = app.add_subcommand("scatter", "Emit scatter CSV from evaluation output");
  scatter->add_option("--in", in_path, "Evaluation JSON")->required();
  scatter->add_option("--mode", mode, "loading_vs_p | vmin_vs_p | loading_vs_q");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*feeder) {
      const Grid grid = make_feeder(feeder_options(config_section(g, "feeder")), g.seed);
      if (g.out.empty())
        std::cout << grid_to_json(grid).dump(2) << "\n";
      else
        save_grid(grid, g.out);
    } else if (*generate) {
      const Grid grid = require_grid(g);
      Dataset ds = generate_profiles(grid, ProfileConfig::from_json(config_section(g, "profile")), g.seed);
      if (gen_label) label_violations(grid, ds);
      save_dataset(ds, grid, require_out(g));
    } else if (*label) {
      const Grid grid = require_grid(g);
      Dataset ds = load_dataset(in_path);
      if (ds.grid_hash != grid_hash(grid)) throw std::runtime_error("dataset was generated for a different grid");
      label_violations(grid, ds);
      save_dataset(ds, grid, require_out(g));
    } else if (*augment) {
      const Grid grid = require_grid(g);
      const Dataset original = load_dataset(in_path);
      if (original.grid_hash != grid_hash(grid)) throw std::runtime_error("dataset was generated for a different grid");
      const Dataset aug = curtail::augment(grid, original, AugmentConfig::from_json(config_section(g, "augment")), g.seed);
      save_dataset(aug, grid, require_out(g));
    } else if (*train) {
      const Grid grid = require_grid(g);
      json cj = config_section(g, "train");
      if (!cj.contains("seed")) cj["seed"] = g.seed;
      const rl::TrainConfig cfg = rl::TrainConfig::from_json(cj);
      std::vector<SupplyTask> tasks;
      for (auto& t : load_tasks(data, grid))
        if (include_original || t.provenance == Provenance::augmented) tasks.push_back(std::move(t));
      if (tasks.empty()) throw std::runtime_error("no training tasks (augmented provenance required)");
      const std::string out = require_out(g);
      const auto h = grid_hash(grid);
      const auto result = rl::train(grid, tasks, cfg, [&](long step, const rl::Agent& a) {
        rl::save_checkpoint({h, cfg, step, a}, out + ".step" + std::to_string(step));
      });
      rl::save_checkpoint({h, cfg, cfg.total_steps, result.agent}, out);
      if (!metrics_path.empty()) write_text(metrics_path, rl::metrics_csv(result.metrics));
      if (!timing_path.empty())
        write_json(timing_path, {{"train_seconds", result.train_seconds}, {"updates", result.updates},
                                 {"rejected_tasks", result.rejected_tasks}});
    } else if (*eval) {
      const Grid grid = require_grid(g);
      const auto ck = rl::load_checkpoint(checkpoint_path);
      std::vector<SupplyTask> tasks;
      for (auto& t : load_tasks(data, grid))
        if (t.provenance == Provenance::original) tasks.push_back(std::move(t));
      const auto records = harness::evaluate(ck, grid, tasks, {threads});
      json out = {{"grid_hash", hash_hex(grid_hash(grid))}, {"summary", harness::to_json(harness::summarize(records), false)}};
      json recs = json::array();
      for (const auto& r : records) recs.push_back(harness::to_json(r));
      double rl_time = 0.0, opf_time = 0.0;
      for (const auto& r : records) rl_time += r.seconds;
      if (with_opf) {
        const auto opf_records = harness::evaluate_opf(grid, tasks, {}, {threads});
        out["opf_summary"] = harness::to_json(harness::summarize(opf_records), false);
        for (const auto& r : opf_records) {
          recs.push_back(harness::to_json(r));
          opf_time += r.seconds;
        }
      }
      out["records"] = std::move(recs);
      write_json(g.out, out);
      if (!timing_path.empty()) {
        const double n = tasks.empty() ? 1.0 : static_cast<double>(tasks.size());
        json t = {{"inference_per_task", rl_time / n}};
        if (with_opf) t["opf_per_task"] = opf_time / n;
        write_json(timing_path, t);
      }
    } else if (*opf) {
      const Grid grid = require_grid(g);
      const auto tasks = load_tasks(data, grid);
      const PowerFlowModel model(grid);
      json arr = json::array();
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (task_index && static_cast<std::size_t>(*task_index) != i) continue;
        const auto& t = tasks[i];
        if (!task_index) {
          const auto before =
              t.labels ? *t.labels : check_feasibility(model, t, reference_setpoints(grid, t));
          if (!before.has_violation) continue;
        }
        OpfOptions opts;
        const json oc = config_section(g, "opf");
        opts.max_outer_iterations = oc.value("max_outer_iterations", opts.max_outer_iterations);
        opts.max_inner_iterations = oc.value("max_inner_iterations", opts.max_inner_iterations);
        opts.initial_penalty = oc.value("initial_penalty", opts.initial_penalty);
        opts.penalty_growth = oc.value("penalty_growth", opts.penalty_growth);
        arr.push_back({{"task", i}, {"timestamp", t.timestamp}, {"solution", to_json(solve_opf(model, t, opts))}});
      }
      if (task_index && arr.empty()) throw UsageError("task index out of range");
      write_json(g.out, arr);
    } else if (*bench) {
      const Grid grid = require_grid(g);
      const auto ck = rl::load_checkpoint(checkpoint_path);
      const auto tasks = load_tasks(data, grid);
      harness::BenchOptions bo;
      bo.repetitions = reps;
      json out = harness::to_json(harness::bench(ck, grid, tasks, bo));
      out["train_seconds"] = train_timing.empty() ? json(nullptr) : read_json(train_timing).at("train_seconds");
      write_json(g.out, out);
    } else if (*scatter) {
      const json ev = read_json(in_path);
      std::vector<harness::EvalRecord> records;
      for (const auto& r : ev.at("records")) records.push_back(harness::eval_record_from_json(r));
      const double base = g.grid.empty() ? 1.0 : load_grid(g.grid).base_mva;
      const auto rows = harness::scatter_rows(records, harness::parse_scatter_mode(mode), base);
      write_text(g.out, harness::scatter_csv(rows));
    }
  } catch (const UsageError& e) {
    return fail("usage", e.what(), 2);
  } catch (const GridValidationError& e) {
    return fail("grid_validation", e.what(), 3);
  } catch (const GridError& e) {
    return fail("grid", e.what(), 3);
  } catch (const ScenarioError& e) {
    return fail("dataset", e.what(), 4);
  } catch (const rl::CheckpointError& e) {
    return fail("checkpoint", e.what(), 5);
  } catch (const harness::EvalError& e) {
    return fail("evaluation", e.what(), 6);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
  return 0;
}
