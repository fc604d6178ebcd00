#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "madelab/bonuses.hpp"
#include "madelab/mdp.hpp"

namespace madelab {

/// Sampling-only view of an environment. Learners never see the underlying
/// TabularMdp; they interact through reset/step alone.
struct EnvHandle {
  int n_states = 0;
  int n_actions = 0;
  std::function<int(std::mt19937_64&)> reset;
  std::function<std::pair<int, double>(int, int, std::mt19937_64&)> step;  // -> (s', r)
  std::optional<int> terminal_state;
};

/// Wraps a TabularMdp as a sampler. `terminal` marks an absorbing state at
/// which episodes end early.
EnvHandle make_env_handle(const TabularMdp& mdp, std::optional<int> terminal = std::nullopt);

struct LearnerConfig {
  int episodes = 1000;
  int max_episode_steps = 100;
  double discount = 0.99;
  double plan_tol = 1e-6;
  // Step-size horizon for Q-learning; 0 derives ceil(1 / (1 - discount)).
  int q_learning_rate_horizon = 0;
  int ppo_total_iters = 0;  // 0 means `episodes`
  BonusConfig bonus;
  std::size_t buffer_capacity = 1000;
  int heatmap_period = 200;
  std::uint64_t rng_seed = 0;

  void validate() const;
  int effective_horizon() const;
  int ppo_iters() const { return ppo_total_iters > 0 ? ppo_total_iters : episodes; }
  /// alpha_k = sqrt(2 log(A) / (H K)) with H = max_episode_steps, K = ppo_iters.
  double ppo_step_size(int n_actions) const;
};

struct StepLog {
  int episode = 0;
  int step = 0;
  int state = 0;
  int action = 0;
  double reward = 0.0;
  double bonus = 0.0;
  long long cum_steps = 0;
};

struct RunRecord {
  std::vector<StepLog> steps;
  std::vector<double> episode_returns;            // undiscounted per-episode sums
  std::vector<long long> episode_end_steps;       // cumulative steps at episode end
  long long total_steps = 0;
  // (cum_steps, per-state-action visit counts) every heatmap_period iterations.
  std::vector<std::pair<long long, Eigen::MatrixXi>> count_snapshots;
  // (cum_steps, full bonus table) once per iteration, for bonus traces.
  std::vector<std::pair<long long, Matrix>> bonus_trace;
  // Acting policy at the start of each episode (greedy one-hot for VI and
  // Q-learning, the stochastic policy for PPO), for offline evaluation.
  std::vector<std::pair<long long, Matrix>> policy_snapshots;
};

RunRecord run_vi_agent(const EnvHandle& env, BonusKind bonus_kind, const LearnerConfig& cfg);
RunRecord run_ppo_agent(const EnvHandle& env, BonusKind bonus_kind, const LearnerConfig& cfg);
RunRecord run_q_agent(const EnvHandle& env, BonusKind bonus_kind, const LearnerConfig& cfg);

}  // namespace madelab
