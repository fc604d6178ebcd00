#include "madelab/policy_grad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace madelab {

namespace {

void require_interior(const Policy& policy) {
  if ((policy.probs.array() <= 0.0).any()) {
    throw std::domain_error("policy must be strictly positive for entropy-style gradients");
  }
}

// (1 - gamma)^{-1} <d^pi_{s,a}, f> for every (s, a), via one policy
// evaluation with reward f: equals Q_f(s, a) = f + gamma P V_f.
Matrix conditional_inner(const TabularMdp& mdp, const Policy& policy, const Matrix& f) {
  TabularMdp scratch = mdp;
  scratch.reward = f;
  return q_of_policy(scratch, policy);
}

}  // namespace

const char* pg_objective_name(PgObjective objective) {
  switch (objective) {
    case PgObjective::Vanilla: return "vanilla";
    case PgObjective::Entropy: return "entropy";
    case PgObjective::RelEntropy: return "rel_entropy";
    case PgObjective::Made: return "made";
  }
  return "unknown";
}

PgObjective pg_objective_from_name(const std::string& name) {
  if (name == "vanilla") return PgObjective::Vanilla;
  if (name == "entropy") return PgObjective::Entropy;
  if (name == "rel_entropy") return PgObjective::RelEntropy;
  if (name == "made") return PgObjective::Made;
  throw std::invalid_argument("unknown pg objective: " + name);
}

void PgConfig::validate() const {
  if (step_size <= 0.0) throw std::invalid_argument("PgConfig: step_size must be positive");
  if (tau0 < 0.0) throw std::invalid_argument("PgConfig: tau0 must be >= 0");
  if (iters < 1) throw std::invalid_argument("PgConfig: iters must be >= 1");
  if (made_sign != 1 && made_sign != -1) {
    throw std::invalid_argument("PgConfig: made_sign must be +1 or -1");
  }
}

Matrix grad_vanilla(const TabularMdp& mdp, const Policy& policy) {
  const Vector d_state = exact_occupancy(mdp, policy).d.rowwise().sum();
  const Matrix q = q_of_policy(mdp, policy);
  return (d_state.asDiagonal() * q) / (1.0 - mdp.discount);
}

Matrix grad_rel_entropy(const TabularMdp& mdp, const Policy& policy, double tau) {
  require_interior(policy);
  return grad_vanilla(mdp, policy) + tau * policy.probs.cwiseInverse();
}

Matrix grad_entropy(const TabularMdp& mdp, const Policy& policy, double tau) {
  require_interior(policy);
  const Matrix base = grad_vanilla(mdp, policy);
  if (tau == 0.0) return base;

  const Matrix log_pi = policy.probs.array().log();
  const Vector d_state = exact_occupancy(mdp, policy).d.rowwise().sum();
  // (1 - gamma)^{-1} <d_{s,a}, -log pi> = -Q_{log pi}(s, a)
  const Matrix inner = -conditional_inner(mdp, policy, log_pi);
  // d/dtheta of -<d, log pi>: the occupancy term gives d(s) Q_{-log pi}(s,a),
  // the explicit log pi term gives -d(s,a)/theta(s,a) = -d(s).
  const Matrix reg_grad = d_state.asDiagonal() * (inner.array() - 1.0).matrix();
  return base + tau / (1.0 - mdp.discount) * reg_grad;
}

Matrix grad_made(const TabularMdp& mdp, const Policy& policy, double tau, int sign) {
  const Matrix base = grad_vanilla(mdp, policy);
  if (tau == 0.0) return base;

  const Matrix d = exact_occupancy(mdp, policy).d;
  const Vector d_state = d.rowwise().sum();
  const Matrix inv_sqrt =
      (d.array() > 0.0).select(d.array().rsqrt(), Eigen::ArrayXXd::Zero(d.rows(), d.cols()));
  const Matrix inner = conditional_inner(mdp, policy, inv_sqrt);
  Matrix reg_grad = Matrix::Zero(d.rows(), d.cols());
  for (int s = 0; s < d.rows(); ++s) {
    for (int a = 0; a < d.cols(); ++a) {
      if (d(s, a) > 0.0) {
        reg_grad(s, a) = 0.5 * d_state(s) * inner(s, a);
      }
    }
  }
  return base + sign * tau * reg_grad;
}

double pg_objective_value(const TabularMdp& mdp, const Policy& policy, PgObjective objective,
                          double tau, int made_sign) {
  const double j = policy_value(mdp, policy);
  switch (objective) {
    case PgObjective::Vanilla:
      return j;
    case PgObjective::RelEntropy:
      require_interior(policy);
      return j + tau * policy.probs.array().log().sum();
    case PgObjective::Entropy: {
      require_interior(policy);
      const Matrix d = exact_occupancy(mdp, policy).d;
      const double cross = (d.array() * policy.probs.array().log()).sum();
      return j - tau / (1.0 - mdp.discount) * cross;
    }
    case PgObjective::Made: {
      const Matrix d = exact_occupancy(mdp, policy).d;
      return j + made_sign * tau * d.array().max(0.0).sqrt().sum();
    }
  }
  throw std::invalid_argument("unknown pg objective");
}

Vector simplex_project(const Vector& v) {
  if (!v.allFinite()) throw std::invalid_argument("simplex_project: non-finite input");
  const int n = static_cast<int>(v.size());
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  // Largest pivot i with sorted[i] > (sum_{j<=i} sorted[j] - 1) / (i + 1).
  double running = 0.0;
  int pivot = 0;
  for (int i = 0; i < n; ++i) {
    running += sorted[i];
    if (sorted[i] - (running - 1.0) / (i + 1) > 0.0) pivot = i;
  }
  running = 0.0;
  for (int i = 0; i <= pivot; ++i) running += sorted[i];
  const double threshold = (running - 1.0) / (pivot + 1);
  return (v.array() - threshold).max(0.0);
}

PgRun pg_run(const TabularMdp& mdp, const PgConfig& cfg, int snapshot_period) {
  cfg.validate();
  Policy pi = cfg.init_policy.probs.size() > 0
                  ? cfg.init_policy
                  : Policy::uniform(mdp.n_states, mdp.n_actions);
  pi.validate();

  PgRun run;
  run.log.reserve(cfg.iters);
  const bool needs_interior =
      cfg.objective == PgObjective::Entropy || cfg.objective == PgObjective::RelEntropy;

  for (int k = 1; k <= cfg.iters; ++k) {
    const double tau_k = cfg.tau0 / std::sqrt(static_cast<double>(k));
    Matrix grad;
    switch (cfg.objective) {
      case PgObjective::Vanilla: grad = grad_vanilla(mdp, pi); break;
      case PgObjective::Entropy: grad = grad_entropy(mdp, pi, tau_k); break;
      case PgObjective::RelEntropy: grad = grad_rel_entropy(mdp, pi, tau_k); break;
      case PgObjective::Made: grad = grad_made(mdp, pi, tau_k, cfg.made_sign); break;
    }

    for (int s = 0; s < mdp.n_states; ++s) {
      Vector row = simplex_project(pi.probs.row(s).transpose() +
                                   cfg.step_size * grad.row(s).transpose());
      if (needs_interior) {
        row = row.cwiseMax(cfg.interior_eps);
        row /= row.sum();
      }
      pi.probs.row(s) = row.transpose();
    }

    PgIterLog entry;
    entry.iter = k;
    entry.j = policy_value(mdp, pi);
    entry.grad_inf = grad.cwiseAbs().maxCoeff();
    if (snapshot_period > 0 && k % snapshot_period == 0) entry.policy = pi;
    run.log.push_back(std::move(entry));
  }
  run.final_policy = pi;
  return run;
}

}  // namespace madelab
