#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Workdir {
  fs::path dir;
  Workdir() {
    dir = fs::temp_directory_path() / ("curtail_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  ~Workdir() { fs::remove_all(dir); }
  [[nodiscard]] std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& args, const std::string& stderr_path) {
  const std::string cmd = std::string(CURTAIL_CLI) + " " + args + " 2> " + stderr_path + " > /dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("cli pipeline smoke test") {
  Workdir w;
  const std::string err = w / "stderr.txt";
  {
    std::ofstream cfg(w / "cfg.json");
    cfg << R"({"profile": {"n_steps": 96, "start_day": 150},
               "augment": {"lower_band_target_fraction": 0.2},
               "train": {"total_steps": 300, "warmup": 100, "metrics_every": 100, "validation_size": 5}})";
  }
  const std::string grid = " --grid " + (w / "grid.json");
  const std::string cfg = " --config " + (w / "cfg.json");
  REQUIRE(run("--seed 3 --out " + (w / "grid.json") + " feeder", err) == 0);
  REQUIRE(run(grid + cfg + " --seed 1 --out " + (w / "tasks.json") + " generate", err) == 0);
  REQUIRE(run(grid + " --out " + (w / "labeled.json") + " label --in " + (w / "tasks.json"), err) == 0);
  {
    std::ifstream in(w / "labeled.json");
    std::string header;
    std::getline(in, header);
    CHECK(json::parse(header).at("tasks") == 96);
  }
  REQUIRE(run(grid + cfg + " --seed 2 --out " + (w / "aug.json") + " augment --in " + (w / "labeled.json"), err) ==
          0);
  REQUIRE(run(grid + cfg + " --out " + (w / "ckpt.json") + " train --data " + (w / "aug.json") + " --metrics " +
                  (w / "metrics.csv"),
              err) == 0);
  CHECK(slurp(w / "metrics.csv").rfind("step,mean_reward", 0) == 0);
  REQUIRE(run(grid + " --out " + (w / "eval.json") + " eval --opf --checkpoint " + (w / "ckpt.json") + " --data " +
                  (w / "labeled.json"),
              err) == 0);
  const json ev = json::parse(slurp(w / "eval.json"));
  CHECK(ev.contains("summary"));
  CHECK(ev.contains("opf_summary"));
  CHECK(ev.at("records").size() == 192);
  REQUIRE(run(grid + " --out " + (w / "opf.json") + " opf --task 50 --data " + (w / "labeled.json"), err) == 0);
  CHECK(json::parse(slurp(w / "opf.json")).size() == 1);
  REQUIRE(run(grid + " --out " + (w / "bench.json") + " bench --checkpoint " + (w / "ckpt.json") + " --data " +
                  (w / "labeled.json"),
              err) == 0);
  CHECK(json::parse(slurp(w / "bench.json")).at("inference_per_task").get<double>() > 0.0);
  // A morning with little PV may leave nothing to plot; both outcomes are handled.
  const int rc = run(grid + " --out " + (w / "scatter.csv") + " scatter --mode loading_vs_p --in " + (w / "eval.json"),
                     err);
  if (rc == 0)
    CHECK(slurp(w / "scatter.csv").rfind("series,task,x,y,flex_kw", 0) == 0);
  else
    CHECK(json::parse(slurp(err)).contains("error"));
}

TEST_CASE("cli errors are machine readable") {
  Workdir w;
  const std::string err = w / "stderr.txt";
  SUBCASE("missing grid file") {
    const int rc = run("--grid " + (w / "nope.json") + " --out " + (w / "x.json") + " generate", err);
    CHECK(rc != 0);
    const json e = json::parse(slurp(err));
    CHECK(e.at("error").contains("kind"));
    CHECK(e.at("error").contains("message"));
  }
  SUBCASE("unknown subcommand option") {
    CHECK(run("generate --bogus", err) == 2);
    CHECK(json::parse(slurp(err)).at("error").at("kind") == "usage");
  }
  SUBCASE("unknown scatter mode") {
    { std::ofstream(w / "eval.json") << R"({"records": []})"; }
    CHECK(run("--out " + (w / "s.csv") + " scatter --mode sideways --in " + (w / "eval.json"), err) != 0);
    CHECK(json::parse(slurp(err)).contains("error"));
  }
  SUBCASE("corrupt checkpoint") {
    REQUIRE(run("--seed 3 --out " + (w / "grid.json") + " feeder", err) == 0);
    { std::ofstream(w / "ckpt.json") << R"({"format": "something-else"})"; }
    { std::ofstream(w / "d.json") << "{}"; }
    const int rc = run("--grid " + (w / "grid.json") + " --out " + (w / "e.json") + " eval --checkpoint " +
                           (w / "ckpt.json") + " --data " + (w / "d.json"),
                       err);
    CHECK(rc == 5);
    CHECK(json::parse(slurp(err)).at("error").at("kind") == "checkpoint");
  }
}
