#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace madelab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Finite discounted MDP with an explicit transition tensor.
/// transition[a] is an S x S row-stochastic matrix: transition[a](s, s') = P(s' | s, a).
struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  std::vector<Matrix> transition;  // one S x S matrix per action
  Matrix reward;                   // S x A
  Vector initial;                  // S
  double discount = 0.0;

  // Throws std::invalid_argument on malformed dimensions, non-stochastic
  // rows, or discount >= 1. Reward entries must be finite; environment
  // constructors additionally keep them in [-1, 1], but planning on
  // bonus-augmented rewards is allowed to exceed that range.
  void validate() const;
};

/// Stochastic action table: probs(s, a) = pi(a | s). Rows sum to 1.
struct Policy {
  Matrix probs;

  int n_states() const { return static_cast<int>(probs.rows()); }
  int n_actions() const { return static_cast<int>(probs.cols()); }
  void validate() const;

  static Policy uniform(int n_states, int n_actions);
  /// Deterministic policy from an action index per state.
  static Policy deterministic(const std::vector<int>& actions, int n_actions);
};

/// Discounted state-action occupancy d(s, a); entries sum to 1.
struct VisitationDensity {
  Matrix d;

  double sum() const { return d.sum(); }
  void validate(double tol = 1e-9) const;
};

/// Weighted sequence of policies (C^k, w^k) with mixing rate eta.
struct PolicyMixture {
  std::vector<Policy> policies;
  Vector weights;
  double eta = 0.0;

  void validate() const;
  /// Appends pi with weight eta, rescaling old weights by (1 - eta).
  void append(Policy pi);
};

struct PlanResult {
  Matrix q;       // S x A
  Policy policy;  // greedy, lowest-index tie break
};

/// Exact occupancy d^pi: solves (I - gamma P_pi^T) d_S = (1 - gamma) rho,
/// then d(s, a) = d_S(s) pi(a|s). Residual of the state solve <= 1e-10.
VisitationDensity exact_occupancy(const TabularMdp& mdp, const Policy& policy);

/// Occupancy d^pi_{s0,a0} when step 0 is forced to (s0, a0):
/// (1-gamma) e_{s0,a0} + gamma * occupancy with initial distribution P(.|s0,a0).
VisitationDensity occupancy_from(const TabularMdp& mdp, const Policy& policy, int s0, int a0);

/// Unbiased Monte-Carlo estimate via geometric-horizon sampling: each rollout
/// draws T ~ Geometric(1 - gamma) and records (s_T, a_T).
VisitationDensity mc_occupancy(const TabularMdp& mdp, const Policy& policy, std::int64_t n_rollouts,
                               std::uint64_t rng_seed);

/// Sum_i w_i * exact_occupancy(mdp, pi_i).
VisitationDensity mixture_occupancy(const TabularMdp& mdp, const PolicyMixture& mix);

/// J(pi) = (1 - gamma)^{-1} <d^pi, r> = E_rho[V^pi].
double policy_value(const TabularMdp& mdp, const Policy& policy);

/// V^pi by direct linear solve of (I - gamma P_pi) V = r_pi.
Vector evaluate_policy(const TabularMdp& mdp, const Policy& policy);

/// Q^pi(s, a) = r(s, a) + gamma sum_s' P(s'|s,a) V^pi(s').
Matrix q_of_policy(const TabularMdp& mdp, const Policy& policy);

/// Value iteration to Bellman residual <= tol; greedy ties broken by lowest
/// action index. Optional warm start reuses a previous Q table.
PlanResult value_iteration_plan(const TabularMdp& mdp, double tol, const Matrix* warm_start = nullptr);

}  // namespace madelab
