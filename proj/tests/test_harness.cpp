#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "madelab/harness.hpp"

using namespace madelab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "madelab_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("minimal config resolves every default") {
  ExperimentConfig cfg = parse_config_text(R"({"experiment": "lock", "seeds": [0]})");
  CHECK(cfg.experiment == ExperimentKind::Lock);
  CHECK(cfg.heatmap_period == 200);
  CHECK(cfg.workers == 1);
  CHECK(cfg.lock.depth == 5);
  CHECK(cfg.lock.slip == 0.5);
  CHECK(cfg.learner.episodes == 1000);
  CHECK(cfg.learners == std::vector<std::string>{"vi", "ppo", "q"});
  CHECK(cfg.bonuses == std::vector<std::string>{"hoeffding", "bernstein", "made"});

  std::string resolved = resolved_config_json(cfg);
  CHECK(resolved.find("\"heatmap_period\": 200") != std::string::npos);
  CHECK(resolved.find("\"depth\": 5") != std::string::npos);
}

TEST_CASE("unknown keys and type mismatches are named in errors") {
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"experiment": "lock", "seeds": [0], "bonuss": 1})"),
                       doctest::Contains("bonuss"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      parse_config_text(R"({"experiment": "lock", "seeds": [0], "lock": {"dept": 3}})"),
      doctest::Contains("lock.dept"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      parse_config_text(R"({"experiment": "lock", "seeds": [0], "heatmap_period": "soon"})"),
      doctest::Contains("heatmap_period"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text(R"({"experiment": "lock", "seeds": []})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config("/nonexistent/config.json"), std::invalid_argument);
}

TEST_CASE("resolved config round-trips to an identical resolved config") {
  ExperimentConfig cfg = parse_config_text(
      R"({"experiment": "chain_pg", "seeds": [1, 2], "pg": {"iters": 42, "step_sizes": [0.5, 2]}})");
  std::string once = resolved_config_json(cfg);
  ExperimentConfig reparsed = parse_config_text(once);
  CHECK(resolved_config_json(reparsed) == once);
}

TEST_CASE("heatmap grids: zero snapshot, count conservation") {
  LockLayout layout{3};
  RunRecord rec;
  Eigen::MatrixXi zero = Eigen::MatrixXi::Zero(layout.n_states(), 2);
  rec.count_snapshots.emplace_back(0, zero);
  Eigen::MatrixXi some = zero;
  some(layout.start(), 0) = 4;
  some(layout.good(0, 1), 1) = 2;
  some(layout.dead(1, 2), 0) = 3;
  rec.count_snapshots.emplace_back(9, some);

  fs::path dir = fresh_dir("heatmap");
  emit_heatmap(rec, layout, dir.string(), "run");

  auto grid_sum = [](const std::string& text) {
    long long sum = 0;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      std::istringstream cells(line);
      std::string cell;
      while (std::getline(cells, cell, ',')) sum += std::stoll(cell);
    }
    return sum;
  };
  CHECK(grid_sum(slurp(dir / "run_snap0_steps0.csv")) == 0);
  CHECK(grid_sum(slurp(dir / "run_snap1_steps9.csv")) == 9);

  RunRecord empty;
  CHECK_THROWS_AS(emit_heatmap(empty, layout, dir.string(), "x"), std::invalid_argument);
}

TEST_CASE("steps_to_max_return finds the first qualifying episode") {
  RunRecord rec;
  rec.episode_returns = {0.1, 0.5, 0.95, 0.4, 0.97};
  rec.episode_end_steps = {10, 25, 31, 44, 60};
  CHECK(steps_to_max_return(rec, 0.95) == 31);
  CHECK(steps_to_max_return(rec, 0.99) == -1);
}

TEST_CASE("chain_pg experiment emits reference value and per-run curves") {
  fs::path dir = fresh_dir("chain_pg");
  ExperimentConfig cfg = parse_config_text(
      R"({"experiment": "chain_pg", "seeds": [0], "emit_svg": true,
          "pg": {"iters": 25, "step_sizes": [1.0]}})");
  cfg.output_dir = dir.string();
  CHECK(run_experiment(cfg) == 0);

  CHECK(fs::exists(dir / "resolved_config.json"));
  std::string ref = slurp(dir / "chain_reference.csv");
  // H = 8 default: J* = 9 (8/9)^9 = 3.11795...
  CHECK(ref.find("3.1179") != std::string::npos);
  for (const char* name : {"vanilla", "entropy", "rel_entropy", "made"}) {
    std::string csv = slurp(dir / ("pg_" + std::string(name) + "_step1.csv"));
    CHECK(count_lines(csv) == 26);  // header + 25 iterations
    CHECK(csv.rfind("iter,objective,J,grad_inf_norm", 0) == 0);
  }
  CHECK(fs::exists(dir / "pg_curves.svg"));
}

TEST_CASE("lock experiment emits per-run, curve, trace, and summary artifacts") {
  fs::path dir = fresh_dir("lock");
  ExperimentConfig cfg = parse_config_text(
      R"({"experiment": "lock", "seeds": [0, 1], "heatmap_period": 10, "workers": 2,
          "learners": ["vi"], "bonuses": ["made"], "bonus_trace_pairs": [[0, 0]],
          "lock": {"depth": 3, "slip": 0.0},
          "learner": {"episodes": 20, "max_episode_steps": 8}})");
  cfg.output_dir = dir.string();
  CHECK(run_experiment(cfg) == 0);

  for (int seed : {0, 1}) {
    std::string prefix = "lock_vi_made_seed" + std::to_string(seed);
    std::string csv = slurp(dir / (prefix + ".csv"));
    CHECK(csv.rfind("episode,step,state,action,reward,bonus,cum_steps", 0) == 0);
    CHECK(fs::exists(dir / (prefix + "_meta.json")));
    CHECK(fs::exists(dir / (prefix + "_trace_s0_a0.csv")));
    CHECK(fs::exists(dir / "heatmaps" / (prefix + "_snap0_steps0.csv")));
  }
  std::string curve = slurp(dir / "curve_vi_made.csv");
  CHECK(count_lines(curve) == 21);  // header + one row per episode
  CHECK(curve.rfind("env_steps,median_return,q25,q75", 0) == 0);
  CHECK(fs::exists(dir / "lock_summary.csv"));
}

TEST_CASE("identical configs produce byte-identical artifacts") {
  const std::string text =
      R"({"experiment": "lock", "seeds": [3], "heatmap_period": 50, "learners": ["q"],
          "bonuses": ["hoeffding"], "lock": {"depth": 3},
          "learner": {"episodes": 30, "max_episode_steps": 8}})";
  fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  ExperimentConfig cfg = parse_config_text(text);
  cfg.output_dir = a.string();
  CHECK(run_experiment(cfg) == 0);
  cfg = parse_config_text(text);
  cfg.output_dir = b.string();
  CHECK(run_experiment(cfg) == 0);

  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() != ".csv") continue;
    fs::path rel = fs::relative(entry.path(), a);
    CHECK(slurp(entry.path()) == slurp(b / rel));
    ++compared;
  }
  CHECK(compared > 0);
}

TEST_CASE("meta experiment writes the iteration log and mixture") {
  fs::path dir = fresh_dir("meta");
  ExperimentConfig cfg = parse_config_text(
      R"({"experiment": "meta", "seeds": [0],
          "meta": {"n_states": 3, "n_actions": 2, "epsilon": 0.4}})");
  cfg.output_dir = dir.string();
  CHECK(run_experiment(cfg) == 0);
  std::string log = slurp(dir / "meta_log.csv");
  CHECK(log.rfind("k,tau_k,J,R_lambda,L_k,plan_gap", 0) == 0);
  CHECK(fs::exists(dir / "meta_mixture.json"));
}

TEST_CASE("checks experiment reports pass") {
  fs::path dir = fresh_dir("checks");
  ExperimentConfig cfg = parse_config_text(R"({"experiment": "checks", "seeds": [0]})");
  cfg.output_dir = dir.string();
  CHECK(run_experiment(cfg) == 0);
  CHECK(slurp(dir / "checks_report.txt").find("ALL CHECKS PASS") != std::string::npos);
}
