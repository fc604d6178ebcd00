#include <doctest.h>

#include <cmath>
#include <random>

#include "madelab/bonuses.hpp"

using namespace madelab;

TEST_CASE("record updates counts and window together") {
  CountTable counts(3, 2);
  RecentBuffer buffer(3, 2, 2);
  record(counts, buffer, 0, 0);
  CHECK(counts.n(0, 0) == 1);
  CHECK(buffer.b(0, 0) == 1);

  // FIFO eviction at capacity 2.
  record(counts, buffer, 1, 0);
  record(counts, buffer, 2, 1);
  CHECK(buffer.b(0, 0) == 0);
  CHECK(buffer.b(1, 0) == 1);
  CHECK(buffer.b(2, 1) == 1);
  CHECK(counts.n(0, 0) == 1);
  CHECK(counts.total == 3);

  CHECK_THROWS_AS(counts.record(5, 0), std::out_of_range);
  CHECK_THROWS_AS(buffer.record(0, 7), std::out_of_range);
}

TEST_CASE("record: replay simulation keeps window and totals exact") {
  const int n_states = 6, n_actions = 3;
  CountTable counts(n_states, n_actions);
  RecentBuffer buffer(n_states, n_actions, 100);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> ss(0, n_states - 1), aa(0, n_actions - 1);
  for (int i = 0; i < 10000; ++i) record(counts, buffer, ss(rng), aa(rng));
  CHECK(buffer.b.sum() == 100);
  CHECK(counts.n.sum() == 10000);
  CHECK(counts.total == 10000);

  // b must equal a recount of the ring contents, exactly.
  Eigen::MatrixXi recount = Eigen::MatrixXi::Zero(n_states, n_actions);
  for (const auto& [s, a] : buffer.ring) recount(s, a) += 1;
  CHECK((buffer.b - recount).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("hoeffding bonus: formula and monotonicity") {
  CountTable counts(2, 1);
  BonusConfig cfg;
  CHECK(hoeffding_bonus(counts, cfg)(0, 0) == doctest::Approx(1.0));  // unvisited -> N = 1
  for (int i = 0; i < 4; ++i) counts.record(0, 0);
  CHECK(hoeffding_bonus(counts, cfg)(0, 0) == doctest::Approx(0.5));

  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> ss(0, 1);
  Matrix prev = hoeffding_bonus(counts, cfg);
  for (int i = 0; i < 200; ++i) {
    counts.record(ss(rng), 0);
    const Matrix cur = hoeffding_bonus(counts, cfg);
    CHECK((cur.array() <= prev.array() + 1e-15).all());
    prev = cur;
  }
}

TEST_CASE("bernstein bonus: zero variance, Bernoulli variance, lower bound") {
  BonusConfig cfg;
  CountTable counts(3, 1);
  // Three visits to (0, 0), always landing in state 1: variance 0, b = 1/N.
  for (int i = 0; i < 3; ++i) counts.record(0, 0, 1);
  Vector values(3);
  values << 5.0, 2.0, 7.0;
  auto model = empirical_model(counts);
  Matrix b = bernstein_bonus(counts, model, values, cfg);
  CHECK(b(0, 0) == doctest::Approx(1.0 / 3.0));

  // Two successors with V = (0, 1), one visit each: Var = 1/4, N = 2.
  CountTable counts2(2, 1);
  counts2.record(0, 0, 0);
  counts2.record(0, 0, 1);
  Vector v2(2);
  v2 << 0.0, 1.0;
  b = bernstein_bonus(counts2, empirical_model(counts2), v2, cfg);
  CHECK(b(0, 0) == doctest::Approx(std::sqrt(0.25 / 2.0) + 0.5));

  // b >= scale / N everywhere.
  for (int s = 0; s < 2; ++s) {
    const double n_sa = std::max(counts2.n(s, 0), 1);
    CHECK(b(s, 0) >= cfg.scale / n_sa - 1e-15);
  }
}

TEST_CASE("made bonus: formula, floors, and forgotten-state effect") {
  BonusConfig cfg;
  CountTable counts(2, 1);
  RecentBuffer buffer(2, 1, 4);
  CHECK(made_bonus(counts, buffer, cfg)(0, 0) == doctest::Approx(1.0));  // N = B = 1 floor

  for (int i = 0; i < 16; ++i) counts.record(0, 0);
  for (int i = 0; i < 4; ++i) buffer.record(0, 0);
  CHECK(made_bonus(counts, buffer, cfg)(0, 0) == doctest::Approx(1.0 / 8.0));

  // Equal totals; pair (0, 0) evicted from the window gets the larger bonus.
  CountTable c2(2, 1);
  RecentBuffer buf2(2, 1, 4);
  for (int i = 0; i < 4; ++i) c2.record(0, 0);
  for (int i = 0; i < 4; ++i) c2.record(1, 0);
  for (int i = 0; i < 2; ++i) buf2.record(0, 0);
  for (int i = 0; i < 4; ++i) buf2.record(1, 0);  // evicts both (0, 0) entries
  CHECK(buf2.b(0, 0) == 0);
  const Matrix bonus = made_bonus(c2, buf2, cfg);
  CHECK(bonus(0, 0) > bonus(1, 0));
}

TEST_CASE("bonus invariants: nonnegative, finite, count-only, made <= hoeffding") {
  BonusConfig cfg;
  CountTable counts(4, 2);
  RecentBuffer buffer(4, 2, 8);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> ss(0, 3), aa(0, 1);
  for (int i = 0; i < 500; ++i) {
    record(counts, buffer, ss(rng), aa(rng));
    const Matrix h = hoeffding_bonus(counts, cfg);
    const Matrix m = made_bonus(counts, buffer, cfg);
    CHECK(h.allFinite());
    CHECK(m.allFinite());
    CHECK((h.array() >= 0.0).all());
    CHECK((m.array() >= 0.0).all());
    // With equal scale and v_max = 1, MADE is pointwise <= Hoeffding.
    CHECK((m.array() <= h.array() + 1e-15).all());
  }
}

TEST_CASE("empirical model: one-hot, uniform default, sampling consistency") {
  CountTable counts(3, 2);
  for (int i = 0; i < 3; ++i) counts.record(0, 0, 2);
  auto model = empirical_model(counts);
  CHECK(model[0](0, 2) == doctest::Approx(1.0));
  CHECK(model[0](0, 0) == doctest::Approx(0.0));
  CHECK(model[1](0, 0) == doctest::Approx(1.0 / 3.0));  // unvisited -> uniform

  Vector truth(3);
  truth << 0.5, 0.3, 0.2;
  std::mt19937_64 rng(8);
  std::discrete_distribution<int> dist(truth.data(), truth.data() + 3);
  CountTable big(3, 2);
  for (int i = 0; i < 10000; ++i) big.record(1, 1, dist(rng));
  const auto est = empirical_model(big);
  CHECK((est[1].row(1).transpose() - truth).lpNorm<1>() < 0.05);
}
