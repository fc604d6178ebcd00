#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "madelab/mdp.hpp"

namespace madelab {

struct MetaConfig {
  int iters = 100;              // K
  double mix_rate = 0.1;        // eta in (0, 1)
  double temperature = 0.1;     // tau in (0, 1)
  double decay_exponent = 2.0;  // c
  double smoothing = 1.0;       // lambda > 0
  double plan_err = 0.0;        // epsilon_p (0 = near-exact planning)
  double density_err = 0.0;     // epsilon_d; > 0 injects oracle noise
  double target_gap = 0.0;      // epsilon driving the preset, informational
  std::uint64_t noise_seed = 0;

  void validate() const;
  double tau_at(int k) const;  // tau / k^c, k >= 1
};

/// eta = 0.1 eps / beta, eps_p = 0.1 eps, eps_d = 0 (exact oracle),
/// tau = 0.1 eps, K = ceil(eta^{-1} log(10 B / eps)), per the convergence rate.
MetaConfig theorem1_preset(int n_states, int n_actions, double lambda, double epsilon);

struct RegularityConstants {
  double lambda = 1.0;
  double tau = 0.1;
  double c = 2.0;
  int n_states = 0;
  int n_actions = 0;

  double beta() const;     // 1 / (4 lambda^2)
  double bound_b() const;  // S A (1 + sqrt((1 + lambda) / lambda))
  double xi() const;       // (pi^2 S A / 6) sqrt((1 + lambda) / lambda)
  double delta_k(int k) const;
};

/// Uniform average of the occupancies of policies produced so far.
struct PolicyCover {
  Matrix rho;
  int k = 0;

  void validate(double tol = 1e-9) const;
};

/// R_lambda = sum_{s,a} sqrt((d + lambda) / (rho_cov + lambda)).
double smoothed_regularizer(const VisitationDensity& d, const PolicyCover& rho, double lambda);

/// dR_lambda/dd(s,a) = 1 / (2 sqrt((d + lambda)(rho_cov + lambda))).
Matrix regularizer_grad(const VisitationDensity& d, const PolicyCover& rho, double lambda);

/// r_k = r + (1 - gamma) tau_k * regularizer_grad.
Matrix meta_reward(const TabularMdp& mdp, const VisitationDensity& d_hat, const PolicyCover& rho,
                   double tau_k, double lambda);

struct MetaIterLog {
  int k = 0;
  double tau_k = 0.0;
  double j = 0.0;         // J of the exact mixture occupancy
  double r_lambda = 0.0;  // smoothed regularizer at the mixture occupancy
  double l_k = 0.0;       // J + tau_k * R_lambda
  double plan_gap = 0.0;  // planning suboptimality bound used this iteration
};

struct MetaResult {
  PolicyMixture mixture;
  std::vector<MetaIterLog> log;
  VisitationDensity final_density;  // exact occupancy of the returned mixture
  PolicyCover final_cover;          // rho_cov over iterations 1..K
  double final_tau = 0.0;           // tau_K
};

/// Algorithm: initialize a uniform-policy mixture; per iteration estimate the
/// mixture density (optionally corrupted by density_err noise), build the
/// gradient-derived reward, plan, and append the new policy with weight eta.
MetaResult run_algorithm1(const TabularMdp& mdp, const MetaConfig& cfg);

struct RegularityReport {
  bool passed = true;
  int trials = 0;
  std::vector<std::string> failures;  // witnesses for any violated claim
};

/// Numeric checks of the four regularity claims over random (d, rho_cov)
/// pairs: concavity chord test, Hessian diagonal within [-beta, 0], B-bounds
/// on value and gradient, and the geometric drift sum <= tau * xi.
RegularityReport regularity_check(int n_states, int n_actions, double lambda, double tau, double c,
                                  int trials, double eta = 0.1, std::uint64_t seed = 0);

/// Normalized reciprocal of rho_cov: the simplex maximizer of sum sqrt(d/rho).
VisitationDensity regularizer_argmax(const PolicyCover& rho);

/// Brute-force oracle: conditional-gradient (Frank-Wolfe) maximization of
/// L(d) = (1-gamma)^{-1} <d, r> + tau_k R_lambda(d) over the occupancy
/// polytope, using exact planning as the linear oracle, to duality gap
/// `gap_tol`. Returns the maximum value found.
double max_regularized_value(const TabularMdp& mdp, const PolicyCover& rho, double tau_k,
                             double lambda, double gap_tol, int max_iters = 5000);

}  // namespace madelab
