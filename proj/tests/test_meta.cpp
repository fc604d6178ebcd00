#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "madelab/envs.hpp"
#include "madelab/meta.hpp"
#include "oracles.hpp"

using namespace madelab;

namespace {

Matrix random_simplex(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  Matrix m(rows, cols);
  for (int s = 0; s < rows; ++s) {
    for (int a = 0; a < cols; ++a) m(s, a) = expo(rng);
  }
  return m / m.sum();
}

}  // namespace

TEST_CASE("smoothed regularizer closed-form points") {
  VisitationDensity d;
  PolicyCover rho;
  d.d = random_simplex(3, 2, 1);
  rho.rho = d.d;
  CHECK(smoothed_regularizer(d, rho, 1.0) == doctest::Approx(6.0).epsilon(1e-12));

  // 2x2, one-hot density against uniform cover, lambda = 1.
  d.d = Matrix::Zero(2, 2);
  d.d(0, 0) = 1.0;
  rho.rho = Matrix::Constant(2, 2, 0.25);
  const double expect = std::sqrt(2.0 / 1.25) + 3.0 * std::sqrt(1.0 / 1.25);
  CHECK(smoothed_regularizer(d, rho, 1.0) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(3.9480).epsilon(1e-4));
}

TEST_CASE("smoothed regularizer never exceeds its analytic cap") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    VisitationDensity d;
    PolicyCover rho;
    d.d = random_simplex(3, 3, seed);
    rho.rho = random_simplex(3, 3, seed + 1000);
    for (double lambda : {0.25, 1.0, 4.0}) {
      const double cap = 9.0 * std::sqrt((1.0 + lambda) / lambda);
      CHECK(smoothed_regularizer(d, rho, lambda) <= cap + 1e-12);
    }
  }
}

TEST_CASE("regularizer gradient: limit value, finite differences, cap") {
  VisitationDensity d;
  PolicyCover rho;
  d.d = Matrix::Constant(2, 2, 0.25);
  rho.rho = d.d;
  Matrix grad = regularizer_grad(d, rho, 1e-12);
  CHECK((grad.array() - 2.0).abs().maxCoeff() < 1e-6);

  d.d = random_simplex(2, 3, 5);
  rho.rho = random_simplex(2, 3, 6);
  const double lambda = 0.5;
  grad = regularizer_grad(d, rho, lambda);
  const double h = 1e-7;
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 3; ++a) {
      VisitationDensity plus = d, minus = d;
      plus.d(s, a) += h;
      minus.d(s, a) -= h;
      const double fd = (smoothed_regularizer(plus, rho, lambda) -
                         smoothed_regularizer(minus, rho, lambda)) /
                        (2.0 * h);
      CHECK(grad(s, a) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
  CHECK(grad.maxCoeff() <= 1.0 / (2.0 * lambda) + 1e-12);
}

TEST_CASE("meta reward composition and bounds") {
  TabularMdp mdp = make_random_mdp(2, 2, 9, 0.5);
  VisitationDensity d;
  PolicyCover rho;
  d.d = Matrix::Constant(2, 2, 0.25);
  rho.rho = d.d;

  CHECK((meta_reward(mdp, d, rho, 0.0, 1.0) - mdp.reward).cwiseAbs().maxCoeff() == 0.0);

  // gamma=0.5, tau=0.1, uniform over 4 pairs, lambda -> 0: intrinsic 0.1 each.
  Matrix intrinsic = meta_reward(mdp, d, rho, 0.1, 1e-12) - mdp.reward;
  CHECK((intrinsic.array() - 0.1).abs().maxCoeff() < 1e-6);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    d.d = random_simplex(2, 2, seed);
    rho.rho = random_simplex(2, 2, seed + 77);
    const double tau_k = 0.05, lambda = 0.5;
    Matrix r_k = meta_reward(mdp, d, rho, tau_k, lambda);
    CHECK(r_k.cwiseAbs().maxCoeff() <=
          mdp.reward.cwiseAbs().maxCoeff() + (1.0 - mdp.discount) * tau_k / (2.0 * lambda) + 1e-12);

    // Intrinsic term decreases as coverage of a pair grows.
    PolicyCover denser = rho;
    denser.rho(0, 0) += 0.1;
    CHECK(meta_reward(mdp, d, denser, tau_k, lambda)(0, 0) < r_k(0, 0));
  }
}

TEST_CASE("regularity constants match the stated formulas") {
  RegularityConstants c025{0.25, 0.1, 2.0, 4, 3};
  CHECK(c025.beta() == doctest::Approx(4.0).epsilon(1e-12));

  RegularityConstants c1{1.0, 0.1, 2.0, 2, 2};
  CHECK(c1.beta() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(c1.bound_b() == doctest::Approx(4.0 * (1.0 + std::sqrt(2.0))).epsilon(1e-12));
  CHECK(c1.bound_b() == doctest::Approx(9.6569).epsilon(1e-4));
  CHECK(c1.xi() ==
        doctest::Approx(std::pow(std::numbers::pi, 2) * 4.0 / 6.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(c1.delta_k(3) > c1.delta_k(4));
}

TEST_CASE("regularity check passes at both lambdas") {
  for (double lambda : {0.25, 1.0}) {
    RegularityReport report = regularity_check(4, 3, lambda, 0.1, 2.0, 1000);
    for (const auto& f : report.failures) MESSAGE(f);
    CHECK(report.passed);
    CHECK(report.trials == 1000);
  }
}

TEST_CASE("theorem-style preset instantiates the stated parameter rules") {
  MetaConfig cfg = theorem1_preset(5, 2, 1.0, 0.05);
  CHECK(cfg.smoothing == 1.0);
  CHECK(cfg.mix_rate == doctest::Approx(0.1 * 0.05 / 0.25).epsilon(1e-12));  // 0.02
  CHECK(cfg.plan_err == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(cfg.temperature == doctest::Approx(0.005).epsilon(1e-12));
  const double b = 10.0 * (1.0 + std::sqrt(2.0));
  CHECK(cfg.iters == static_cast<int>(std::ceil(std::log(10.0 * b / 0.05) / cfg.mix_rate)));
  cfg.validate();
}

TEST_CASE("mixture bookkeeping over algorithm iterations") {
  TabularMdp mdp = make_random_mdp(3, 2, 13);
  MetaConfig cfg;
  cfg.iters = 1;
  cfg.mix_rate = 0.3;
  cfg.temperature = 0.1;
  MetaResult one = run_algorithm1(mdp, cfg);
  REQUIRE(one.mixture.policies.size() == 2);
  CHECK(one.mixture.weights(0) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(one.mixture.weights(1) == doctest::Approx(0.3).epsilon(1e-12));

  cfg.iters = 2;
  cfg.mix_rate = 0.5;
  MetaResult two = run_algorithm1(mdp, cfg);
  REQUIRE(two.mixture.policies.size() == 3);
  CHECK(two.mixture.weights(0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(two.mixture.weights(1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(two.mixture.weights(2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(two.mixture.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  two.final_density.validate();
  two.final_cover.validate();
}

TEST_CASE("per-iteration objective obeys the drift-slack inequality") {
  TabularMdp mdp = make_random_mdp(4, 2, 23);
  MetaConfig cfg;
  cfg.iters = 60;
  cfg.mix_rate = 0.1;
  cfg.temperature = 0.1;
  cfg.smoothing = 1.0;
  MetaResult result = run_algorithm1(mdp, cfg);

  RegularityConstants constants{cfg.smoothing, cfg.temperature, cfg.decay_exponent, 4, 2};
  const double beta = constants.beta();
  for (std::size_t i = 0; i + 1 < result.log.size(); ++i) {
    const int k = result.log[i].k;
    // Temperature decay can shed at most the whole tau_k R term, which is
    // bounded by tau_k * sup R = delta_{k-1}; the remaining slack is the
    // conditional-gradient step's smoothness and oracle-error budget.
    const double slack = constants.delta_k(k - 1) + cfg.mix_rate * result.log[i].plan_gap +
                         2.0 * cfg.mix_rate * beta * cfg.density_err +
                         4.0 * cfg.mix_rate * cfg.mix_rate * beta;
    CHECK(result.log[i + 1].l_k >= result.log[i].l_k - slack - 1e-9);
  }
}

TEST_CASE("argmax of the coverage ratio: closed form and oracle agreement") {
  PolicyCover rho;
  rho.rho = Matrix::Constant(2, 2, 0.25);
  CHECK((regularizer_argmax(rho).d.array() - 0.25).abs().maxCoeff() < 1e-15);

  rho.rho = Matrix(2, 2);
  rho.rho << 0.64, 0.16, 0.16, 0.04;
  Matrix expect(2, 2);
  expect << 0.04, 0.16, 0.16, 0.64;
  CHECK((regularizer_argmax(rho).d - expect).cwiseAbs().maxCoeff() < 1e-12);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Matrix cover = random_simplex(2, 3, seed + 7).array() + 0.01;
    cover /= cover.sum();
    rho.rho = cover;
    Matrix closed = regularizer_argmax(rho).d;
    Matrix numeric = madelab::testing::pga_regularizer_argmax(cover);
    CHECK((closed - numeric).cwiseAbs().sum() < 1e-6);
  }

  rho.rho = Matrix::Zero(2, 2);
  CHECK_THROWS_AS(regularizer_argmax(rho), std::invalid_argument);
}

TEST_CASE("conditional-gradient oracle dominates any single policy value") {
  TabularMdp mdp = make_random_mdp(4, 2, 41);
  PolicyCover rho;
  rho.rho = exact_occupancy(mdp, Policy::uniform(4, 2)).d;
  const double tau_k = 0.01, lambda = 1.0;
  const double best = max_regularized_value(mdp, rho, tau_k, lambda, 1e-6);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Policy pi = madelab::testing::random_policy(4, 2, seed);
    VisitationDensity d = exact_occupancy(mdp, pi);
    const double value = policy_value(mdp, pi) + tau_k * smoothed_regularizer(d, rho, lambda);
    CHECK(best >= value - 1e-6);
  }
}

TEST_CASE("meta config validation") {
  MetaConfig cfg;
  cfg.mix_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.mix_rate = 0.1;
  cfg.smoothing = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.smoothing = 1.0;
  cfg.temperature = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
