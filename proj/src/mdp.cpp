#include "madelab/mdp.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace madelab {

namespace {

constexpr double kStochasticTol = 1e-12;

void check_distribution(const Eigen::Ref<const Vector>& row, const char* what) {
  if ((row.array() < 0.0).any()) {
    throw std::invalid_argument(std::string(what) + ": negative probability entry");
  }
  if (std::abs(row.sum() - 1.0) > kStochasticTol) {
    std::ostringstream oss;
    oss << what << ": row sums to " << row.sum() << ", expected 1";
    throw std::invalid_argument(oss.str());
  }
}

// P_pi(s, s') = sum_a pi(a|s) P(s'|s, a)
Matrix policy_transition(const TabularMdp& mdp, const Policy& policy) {
  Matrix p = Matrix::Zero(mdp.n_states, mdp.n_states);
  for (int a = 0; a < mdp.n_actions; ++a) {
    p += policy.probs.col(a).asDiagonal() * mdp.transition[a];
  }
  return p;
}

void check_dims(const TabularMdp& mdp, const Policy& policy) {
  if (policy.n_states() != mdp.n_states || policy.n_actions() != mdp.n_actions) {
    throw std::invalid_argument("policy dimensions do not match MDP");
  }
}

}  // namespace

void TabularMdp::validate() const {
  if (n_states < 1 || n_actions < 1) {
    throw std::invalid_argument("TabularMdp: dimensions must be positive");
  }
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw std::invalid_argument("TabularMdp: discount must lie in [0, 1)");
  }
  if (static_cast<int>(transition.size()) != n_actions) {
    throw std::invalid_argument("TabularMdp: transition tensor has wrong action count");
  }
  for (int a = 0; a < n_actions; ++a) {
    if (transition[a].rows() != n_states || transition[a].cols() != n_states) {
      throw std::invalid_argument("TabularMdp: transition matrix has wrong shape");
    }
    for (int s = 0; s < n_states; ++s) {
      check_distribution(transition[a].row(s).transpose(), "TabularMdp transition");
    }
  }
  if (reward.rows() != n_states || reward.cols() != n_actions) {
    throw std::invalid_argument("TabularMdp: reward table has wrong shape");
  }
  if (!reward.allFinite()) {
    throw std::invalid_argument("TabularMdp: reward table has non-finite entries");
  }
  if (initial.size() != n_states) {
    throw std::invalid_argument("TabularMdp: initial distribution has wrong size");
  }
  check_distribution(initial, "TabularMdp initial distribution");
}

void Policy::validate() const {
  for (int s = 0; s < n_states(); ++s) {
    check_distribution(probs.row(s).transpose(), "Policy");
  }
}

Policy Policy::uniform(int n_states, int n_actions) {
  Policy pi;
  pi.probs = Matrix::Constant(n_states, n_actions, 1.0 / n_actions);
  return pi;
}

Policy Policy::deterministic(const std::vector<int>& actions, int n_actions) {
  Policy pi;
  pi.probs = Matrix::Zero(static_cast<int>(actions.size()), n_actions);
  for (int s = 0; s < static_cast<int>(actions.size()); ++s) {
    pi.probs(s, actions[s]) = 1.0;
  }
  return pi;
}

void VisitationDensity::validate(double tol) const {
  if ((d.array() < 0.0).any()) {
    throw std::invalid_argument("VisitationDensity: negative entry");
  }
  if (std::abs(d.sum() - 1.0) > tol) {
    throw std::invalid_argument("VisitationDensity: entries do not sum to 1");
  }
}

void PolicyMixture::validate() const {
  if (static_cast<int>(policies.size()) != weights.size()) {
    throw std::invalid_argument("PolicyMixture: sequence and weights have different lengths");
  }
  check_distribution(weights, "PolicyMixture weights");
}

void PolicyMixture::append(Policy pi) {
  weights.conservativeResize(weights.size() + 1);
  weights.head(weights.size() - 1) *= (1.0 - eta);
  weights(weights.size() - 1) = eta;
  policies.push_back(std::move(pi));
}

VisitationDensity exact_occupancy(const TabularMdp& mdp, const Policy& policy) {
  check_dims(mdp, policy);
  const double gamma = mdp.discount;
  const Matrix p_pi = policy_transition(mdp, policy);
  const Matrix system = Matrix::Identity(mdp.n_states, mdp.n_states) - gamma * p_pi.transpose();
  const Vector rhs = (1.0 - gamma) * mdp.initial;
  Vector d_state = system.partialPivLu().solve(rhs);
  const double residual = (system * d_state - rhs).lpNorm<Eigen::Infinity>();
  if (residual > 1e-10) {
    throw std::runtime_error("exact_occupancy: linear solve residual above 1e-10");
  }
  // Rounding can leave tiny negatives on unreachable states.
  d_state = d_state.cwiseMax(0.0);
  VisitationDensity out;
  out.d = d_state.asDiagonal() * policy.probs;
  return out;
}

VisitationDensity occupancy_from(const TabularMdp& mdp, const Policy& policy, int s0, int a0) {
  check_dims(mdp, policy);
  if (s0 < 0 || s0 >= mdp.n_states || a0 < 0 || a0 >= mdp.n_actions) {
    throw std::invalid_argument("occupancy_from: state or action out of range");
  }
  TabularMdp shifted = mdp;
  shifted.initial = mdp.transition[a0].row(s0).transpose();
  VisitationDensity tail = exact_occupancy(shifted, policy);
  VisitationDensity out;
  out.d = mdp.discount * tail.d;
  out.d(s0, a0) += 1.0 - mdp.discount;
  return out;
}

VisitationDensity mc_occupancy(const TabularMdp& mdp, const Policy& policy, std::int64_t n_rollouts,
                               std::uint64_t rng_seed) {
  check_dims(mdp, policy);
  if (n_rollouts < 1) {
    throw std::invalid_argument("mc_occupancy: n_rollouts must be >= 1");
  }
  std::mt19937_64 rng(rng_seed);
  std::geometric_distribution<int> horizon(1.0 - mdp.discount);
  auto sample_row = [&rng](const Eigen::Ref<const Vector>& row) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    double acc = 0.0;
    for (int i = 0; i < row.size(); ++i) {
      acc += row(i);
      if (u <= acc) return i;
    }
    return static_cast<int>(row.size()) - 1;
  };

  Matrix counts = Matrix::Zero(mdp.n_states, mdp.n_actions);
  for (std::int64_t i = 0; i < n_rollouts; ++i) {
    const int stop = horizon(rng);
    int s = sample_row(mdp.initial);
    int a = sample_row(policy.probs.row(s).transpose());
    for (int t = 0; t < stop; ++t) {
      s = sample_row(mdp.transition[a].row(s).transpose());
      a = sample_row(policy.probs.row(s).transpose());
    }
    counts(s, a) += 1.0;
  }
  VisitationDensity out;
  out.d = counts / static_cast<double>(n_rollouts);
  return out;
}

VisitationDensity mixture_occupancy(const TabularMdp& mdp, const PolicyMixture& mix) {
  mix.validate();
  Matrix d = Matrix::Zero(mdp.n_states, mdp.n_actions);
  for (std::size_t i = 0; i < mix.policies.size(); ++i) {
    d += mix.weights(static_cast<int>(i)) * exact_occupancy(mdp, mix.policies[i]).d;
  }
  VisitationDensity out;
  out.d = d;
  return out;
}

Vector evaluate_policy(const TabularMdp& mdp, const Policy& policy) {
  check_dims(mdp, policy);
  const Matrix p_pi = policy_transition(mdp, policy);
  const Vector r_pi = (policy.probs.array() * mdp.reward.array()).rowwise().sum();
  const Matrix system = Matrix::Identity(mdp.n_states, mdp.n_states) - mdp.discount * p_pi;
  return system.partialPivLu().solve(r_pi);
}

Matrix q_of_policy(const TabularMdp& mdp, const Policy& policy) {
  const Vector v = evaluate_policy(mdp, policy);
  Matrix q(mdp.n_states, mdp.n_actions);
  for (int a = 0; a < mdp.n_actions; ++a) {
    q.col(a) = mdp.reward.col(a) + mdp.discount * (mdp.transition[a] * v);
  }
  return q;
}

double policy_value(const TabularMdp& mdp, const Policy& policy) {
  const VisitationDensity d = exact_occupancy(mdp, policy);
  return (d.d.array() * mdp.reward.array()).sum() / (1.0 - mdp.discount);
}

PlanResult value_iteration_plan(const TabularMdp& mdp, double tol, const Matrix* warm_start) {
  if (tol <= 0.0) {
    throw std::invalid_argument("value_iteration_plan: tol must be positive");
  }
  Matrix q = warm_start != nullptr ? *warm_start : Matrix::Zero(mdp.n_states, mdp.n_actions);
  while (true) {
    const Vector v = q.rowwise().maxCoeff();
    Matrix next(mdp.n_states, mdp.n_actions);
    for (int a = 0; a < mdp.n_actions; ++a) {
      next.col(a) = mdp.reward.col(a) + mdp.discount * (mdp.transition[a] * v);
    }
    const double residual = (next - q).cwiseAbs().maxCoeff();
    q = std::move(next);
    if (residual <= tol) break;
  }
  std::vector<int> greedy(mdp.n_states, 0);
  for (int s = 0; s < mdp.n_states; ++s) {
    int best = 0;
    for (int a = 1; a < mdp.n_actions; ++a) {
      if (q(s, a) > q(s, best)) best = a;
    }
    greedy[s] = best;
  }
  return PlanResult{std::move(q), Policy::deterministic(greedy, mdp.n_actions)};
}

}  // namespace madelab
