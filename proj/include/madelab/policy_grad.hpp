#pragma once

#include <string>
#include <vector>

#include "madelab/mdp.hpp"

namespace madelab {

enum class PgObjective { Vanilla, Entropy, RelEntropy, Made };

const char* pg_objective_name(PgObjective objective);
PgObjective pg_objective_from_name(const std::string& name);

struct PgConfig {
  PgObjective objective = PgObjective::Vanilla;
  double step_size = 1.0;
  int iters = 10000;
  double tau0 = 0.1;  // schedule tau_k = tau0 / sqrt(k), k >= 1
  int made_sign = +1;
  Policy init_policy;
  double interior_eps = 1e-12;

  void validate() const;
};

/// Gradient of J for the direct parameterization pi(a|s) = theta_{s,a}:
/// dJ/dtheta_{s,a} = (1 - gamma)^{-1} d^pi(s) Q^pi(s, a).
Matrix grad_vanilla(const TabularMdp& mdp, const Policy& policy);

/// Gradient of J + tau * sum_{s,a} log theta_{s,a}.
Matrix grad_rel_entropy(const TabularMdp& mdp, const Policy& policy, double tau);

/// Gradient of J - tau (1 - gamma)^{-1} E_{d^pi}[log pi].
Matrix grad_entropy(const TabularMdp& mdp, const Policy& policy, double tau);

/// Gradient of J + sign * tau * sum_{s,a} sqrt(d^pi(s,a)).
Matrix grad_made(const TabularMdp& mdp, const Policy& policy, double tau, int sign);

/// Scalar objectives matching the gradients above (used for diagnostics and
/// finite-difference checks).
double pg_objective_value(const TabularMdp& mdp, const Policy& policy, PgObjective objective,
                          double tau, int made_sign);

/// Euclidean projection onto the probability simplex (sort-and-threshold).
Vector simplex_project(const Vector& v);

struct PgIterLog {
  int iter = 0;
  double j = 0.0;        // extrinsic objective only
  double grad_inf = 0.0;
  Policy policy;
};

struct PgRun {
  std::vector<PgIterLog> log;
  Policy final_policy;
};

/// Projected gradient ascent with the tau_k schedule; logs J per iteration.
/// `snapshot_period` controls how often policies are kept in the log (the
/// scalar columns are always logged).
PgRun pg_run(const TabularMdp& mdp, const PgConfig& cfg, int snapshot_period = 0);

}  // namespace madelab
