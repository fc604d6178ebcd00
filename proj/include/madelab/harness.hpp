#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "madelab/bonuses.hpp"
#include "madelab/envs.hpp"
#include "madelab/learners.hpp"
#include "madelab/meta.hpp"
#include "madelab/policy_grad.hpp"

namespace madelab {

enum class ExperimentKind { Lock, ChainPg, Meta, Checks };

const char* experiment_kind_name(ExperimentKind kind);
ExperimentKind experiment_kind_from_name(const std::string& name);

struct PgExperimentConfig {
  int iters = 10000;
  double tau0 = 0.1;
  int made_sign = +1;
  std::vector<double> step_sizes = {0.5, 1.0, 2.0, 5.0};
};

struct MetaExperimentConfig {
  // MDP under optimization: a random instance, reproducible from its seed.
  int n_states = 5;
  int n_actions = 2;
  double discount = 0.9;
  std::uint64_t mdp_seed = 0;
  double lambda = 1.0;
  double epsilon = 0.05;  // drives the convergence-rate preset
  double density_err = 0.0;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Lock;
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir = "out";
  int heatmap_period = 200;
  int workers = 1;
  std::vector<std::pair<int, int>> bonus_trace_pairs;
  bool emit_svg = true;

  LockConfig lock;
  LearnerConfig learner;
  std::vector<std::string> learners = {"vi", "ppo", "q"};
  std::vector<std::string> bonuses = {"hoeffding", "bernstein", "made"};
  ChainConfig chain;
  PgExperimentConfig pg;
  MetaExperimentConfig meta;

  void validate() const;
};

/// Strict parse: unknown keys are errors; all defaults are materialized.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);
std::string resolved_config_json(const ExperimentConfig& cfg);

/// Runs the configured experiment; returns 0 when all runs and checks pass.
/// Writes resolved_config.json first, then per-run and aggregate artifacts.
int run_experiment(const ExperimentConfig& cfg);

/// One CSV per snapshot, laid out as the lock's state grid.
void emit_heatmap(const RunRecord& record, const LockLayout& layout, const std::string& dir,
                  const std::string& prefix);

/// Steps-to-max-return: cumulative steps at the end of the first episode whose
/// return reaches the maximum achievable episode return (-1 if never).
long long steps_to_max_return(const RunRecord& record, double max_return, double tol = 1e-9);

}  // namespace madelab
