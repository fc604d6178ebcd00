#include "madelab/meta.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace madelab {

namespace {

void check_shapes(const VisitationDensity& d, const PolicyCover& rho) {
  if (d.d.rows() != rho.rho.rows() || d.d.cols() != rho.rho.cols()) {
    throw std::invalid_argument("density and policy cover have mismatched shapes");
  }
}

Matrix random_density(int n_states, int n_actions, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  Matrix d(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) d(s, a) = expo(rng);
  }
  return d / d.sum();
}

}  // namespace

void MetaConfig::validate() const {
  if (iters < 1) throw std::invalid_argument("MetaConfig: iters must be >= 1");
  if (!(mix_rate > 0.0 && mix_rate < 1.0)) {
    throw std::invalid_argument("MetaConfig: mix_rate must lie in (0, 1)");
  }
  if (!(temperature > 0.0 && temperature < 1.0)) {
    throw std::invalid_argument("MetaConfig: temperature must lie in (0, 1)");
  }
  if (decay_exponent <= 0.0) throw std::invalid_argument("MetaConfig: decay_exponent must be > 0");
  if (smoothing <= 0.0) throw std::invalid_argument("MetaConfig: smoothing must be > 0");
  if (plan_err < 0.0 || density_err < 0.0) {
    throw std::invalid_argument("MetaConfig: oracle errors must be >= 0");
  }
}

double MetaConfig::tau_at(int k) const {
  return temperature / std::pow(static_cast<double>(k), decay_exponent);
}

MetaConfig theorem1_preset(int n_states, int n_actions, double lambda, double epsilon) {
  if (epsilon <= 0.0) throw std::invalid_argument("theorem1_preset: epsilon must be positive");
  RegularityConstants constants;
  constants.lambda = lambda;
  constants.n_states = n_states;
  constants.n_actions = n_actions;
  const double beta = constants.beta();
  MetaConfig cfg;
  cfg.smoothing = lambda;
  cfg.mix_rate = 0.1 * epsilon / beta;
  cfg.plan_err = 0.1 * epsilon;
  cfg.density_err = 0.0;
  cfg.temperature = 0.1 * epsilon;
  cfg.decay_exponent = 2.0;
  cfg.target_gap = epsilon;
  cfg.iters = static_cast<int>(
      std::ceil(std::log(10.0 * constants.bound_b() / epsilon) / cfg.mix_rate));
  return cfg;
}

double RegularityConstants::beta() const { return 1.0 / (4.0 * lambda * lambda); }

double RegularityConstants::bound_b() const {
  return n_states * n_actions * (1.0 + std::sqrt((1.0 + lambda) / lambda));
}

double RegularityConstants::xi() const {
  return std::numbers::pi * std::numbers::pi * n_states * n_actions / 6.0 *
         std::sqrt((1.0 + lambda) / lambda);
}

double RegularityConstants::delta_k(int k) const {
  return n_states * n_actions * tau / std::pow(static_cast<double>(k + 1), c) *
         std::sqrt((1.0 + lambda) / lambda);
}

void PolicyCover::validate(double tol) const {
  if ((rho.array() < 0.0).any()) throw std::invalid_argument("PolicyCover: negative entry");
  if (std::abs(rho.sum() - 1.0) > tol) {
    throw std::invalid_argument("PolicyCover: entries do not sum to 1");
  }
}

double smoothed_regularizer(const VisitationDensity& d, const PolicyCover& rho, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("smoothed_regularizer: lambda must be > 0");
  check_shapes(d, rho);
  return ((d.d.array() + lambda) / (rho.rho.array() + lambda)).sqrt().sum();
}

Matrix regularizer_grad(const VisitationDensity& d, const PolicyCover& rho, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("regularizer_grad: lambda must be > 0");
  check_shapes(d, rho);
  return 0.5 * ((d.d.array() + lambda) * (rho.rho.array() + lambda)).rsqrt();
}

Matrix meta_reward(const TabularMdp& mdp, const VisitationDensity& d_hat, const PolicyCover& rho,
                   double tau_k, double lambda) {
  return mdp.reward + (1.0 - mdp.discount) * tau_k * regularizer_grad(d_hat, rho, lambda);
}

MetaResult run_algorithm1(const TabularMdp& mdp, const MetaConfig& cfg) {
  cfg.validate();
  const double gamma = mdp.discount;
  // epsilon_p <= 2 gamma tol / (1 - gamma) for value iteration at tolerance tol.
  const double vi_tol =
      cfg.plan_err > 0.0 ? cfg.plan_err * (1.0 - gamma) / (2.0 * std::max(gamma, 0.5)) : 1e-10;

  std::mt19937_64 noise_rng(cfg.noise_seed);
  std::uniform_real_distribution<double> noise(-cfg.density_err, cfg.density_err);

  MetaResult result;
  result.mixture.eta = cfg.mix_rate;
  result.mixture.policies = {Policy::uniform(mdp.n_states, mdp.n_actions)};
  result.mixture.weights = Vector::Ones(1);

  // Occupancies of mixture components, cached; rho_cov is their running
  // uniform average over iterations 1..k.
  std::vector<Matrix> occupancies = {
      exact_occupancy(mdp, result.mixture.policies.front()).d};
  Matrix cover_sum = Matrix::Zero(mdp.n_states, mdp.n_actions);
  PolicyCover cover;
  cover.rho = occupancies.front();
  cover.k = 0;

  for (int k = 1; k <= cfg.iters; ++k) {
    // Exact mixture density from cached component occupancies.
    Matrix mix_d = Matrix::Zero(mdp.n_states, mdp.n_actions);
    for (std::size_t i = 0; i < occupancies.size(); ++i) {
      mix_d += result.mixture.weights(static_cast<int>(i)) * occupancies[i];
    }

    VisitationDensity d_hat;
    d_hat.d = mix_d;
    if (cfg.density_err > 0.0) {
      for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
          d_hat.d(s, a) = std::max(0.0, d_hat.d(s, a) + noise(noise_rng));
        }
      }
    }

    cover_sum += occupancies.back();  // occupancy of pi_k
    cover.rho = cover_sum / k;
    cover.k = k;

    const double tau_k = cfg.tau_at(k);
    TabularMdp modified = mdp;
    modified.reward = meta_reward(mdp, d_hat, cover, tau_k, cfg.smoothing);
    const PlanResult plan = value_iteration_plan(modified, vi_tol);

    result.mixture.append(plan.policy);
    occupancies.push_back(exact_occupancy(mdp, plan.policy).d);

    VisitationDensity exact_mix;
    exact_mix.d = mix_d;
    MetaIterLog entry;
    entry.k = k;
    entry.tau_k = tau_k;
    entry.j = (mix_d.array() * mdp.reward.array()).sum() / (1.0 - gamma);
    entry.r_lambda = smoothed_regularizer(exact_mix, cover, cfg.smoothing);
    entry.l_k = entry.j + tau_k * entry.r_lambda;
    entry.plan_gap = 2.0 * gamma * vi_tol / (1.0 - gamma);
    result.log.push_back(entry);
  }

  result.final_density = mixture_occupancy(mdp, result.mixture);
  result.final_cover = cover;
  result.final_tau = cfg.tau_at(cfg.iters);
  return result;
}

RegularityReport regularity_check(int n_states, int n_actions, double lambda, double tau, double c,
                                  int trials, double eta, std::uint64_t seed) {
  if (lambda <= 0.0) throw std::invalid_argument("regularity_check: lambda must be > 0");
  RegularityConstants constants{lambda, tau, c, n_states, n_actions};
  const double beta = constants.beta();
  const double bound = constants.bound_b();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  RegularityReport report;
  report.trials = trials;
  auto fail = [&report](const std::string& message) {
    report.passed = false;
    if (report.failures.size() < 20) report.failures.push_back(message);
  };

  for (int trial = 0; trial < trials; ++trial) {
    const Matrix d = random_density(n_states, n_actions, rng);
    const Matrix d_other = random_density(n_states, n_actions, rng);
    const Matrix rho = random_density(n_states, n_actions, rng);
    Matrix r(n_states, n_actions);
    for (int s = 0; s < n_states; ++s) {
      for (int a = 0; a < n_actions; ++a) r(s, a) = unif(rng);
    }
    const int k = 1 + trial % 10;
    const double tau_k = tau / std::pow(static_cast<double>(k), c);

    PolicyCover cover;
    cover.rho = rho;
    cover.k = k;
    auto value = [&](const Matrix& dm) {
      VisitationDensity vd;
      vd.d = dm;
      // The bounded-objective claim uses the occupancy-form objective
      // <d, r> + tau_k R_lambda(d).
      return (dm.array() * r.array()).sum() + tau_k * smoothed_regularizer(vd, cover, lambda);
    };

    // (i) concavity via a random chord.
    const double alpha = unif(rng);
    const Matrix blend = alpha * d + (1.0 - alpha) * d_other;
    if (value(blend) < alpha * value(d) + (1.0 - alpha) * value(d_other) - 1e-9) {
      std::ostringstream oss;
      oss << "concavity chord violated at trial " << trial;
      fail(oss.str());
    }

    // (ii) Hessian diagonal within [-beta, 0].
    const Matrix hess_diag =
        -tau_k / 4.0 *
        ((d.array() + lambda).pow(1.5) * (rho.array() + lambda).sqrt()).inverse().matrix();
    if ((hess_diag.array() > 1e-15).any() || (hess_diag.array() < -beta - 1e-12).any()) {
      std::ostringstream oss;
      oss << "Hessian diagonal out of [-beta, 0] at trial " << trial;
      fail(oss.str());
    }

    // (iii) B-boundedness of value and gradient.
    VisitationDensity vd;
    vd.d = d;
    const Matrix grad = r + tau_k * regularizer_grad(vd, cover, lambda);
    if (value(d) > bound + 1e-12 || grad.cwiseAbs().maxCoeff() > bound + 1e-12) {
      std::ostringstream oss;
      oss << "B-bound violated at trial " << trial << " (value " << value(d) << ", grad "
          << grad.cwiseAbs().maxCoeff() << ", B " << bound << ")";
      fail(oss.str());
    }
  }

  // (iv) geometric drift sum <= tau * xi, checked for all k <= 10000.
  constants.tau = tau;
  const double limit = tau * constants.xi();
  double drift = 0.0;  // sum_{i=0}^{k} (1-eta)^i delta_{k-i}, updated recursively
  for (int k = 0; k <= 10000; ++k) {
    drift = (1.0 - eta) * drift + constants.delta_k(k);
    if (drift > limit + 1e-12) {
      std::ostringstream oss;
      oss << "drift sum exceeds tau*xi at k=" << k << " (" << drift << " > " << limit << ")";
      fail(oss.str());
      break;
    }
  }
  return report;
}

VisitationDensity regularizer_argmax(const PolicyCover& rho) {
  if ((rho.rho.array() <= 0.0).any()) {
    throw std::invalid_argument("regularizer_argmax: rho_cov must be strictly positive");
  }
  VisitationDensity out;
  out.d = rho.rho.cwiseInverse();
  out.d /= out.d.sum();
  return out;
}

double max_regularized_value(const TabularMdp& mdp, const PolicyCover& rho, double tau_k,
                             double lambda, double gap_tol, int max_iters) {
  const double inv = 1.0 / (1.0 - mdp.discount);
  auto value = [&](const Matrix& dm) {
    VisitationDensity vd;
    vd.d = dm;
    return inv * (dm.array() * mdp.reward.array()).sum() +
           tau_k * smoothed_regularizer(vd, rho, lambda);
  };

  Matrix d = exact_occupancy(mdp, Policy::uniform(mdp.n_states, mdp.n_actions)).d;
  for (int t = 0; t < max_iters; ++t) {
    VisitationDensity vd;
    vd.d = d;
    const Matrix grad = inv * mdp.reward + tau_k * regularizer_grad(vd, rho, lambda);

    // Linear oracle: exact planning with the gradient as reward maximizes
    // <d', grad> over the occupancy polytope.
    TabularMdp linear = mdp;
    linear.reward = grad;
    const PlanResult plan = value_iteration_plan(linear, 1e-12);
    const Matrix vertex = exact_occupancy(mdp, plan.policy).d;

    const double gap = ((vertex - d).array() * grad.array()).sum();
    if (gap <= gap_tol) break;

    // Golden-section line search on the chord (concave 1-D problem).
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = 1.0;
    double mid1 = hi - phi * (hi - lo), mid2 = lo + phi * (hi - lo);
    double f1 = value(d + mid1 * (vertex - d)), f2 = value(d + mid2 * (vertex - d));
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) {
        lo = mid1;
        mid1 = mid2;
        f1 = f2;
        mid2 = lo + phi * (hi - lo);
        f2 = value(d + mid2 * (vertex - d));
      } else {
        hi = mid2;
        mid2 = mid1;
        f2 = f1;
        mid1 = hi - phi * (hi - lo);
        f1 = value(d + mid1 * (vertex - d));
      }
    }
    const double step = 0.5 * (lo + hi);
    if (step <= 0.0) break;
    d += step * (vertex - d);
  }
  return value(d);
}

}  // namespace madelab
