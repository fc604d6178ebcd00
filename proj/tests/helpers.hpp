#pragma once

#include <random>

#include "madelab/envs.hpp"
#include "madelab/mdp.hpp"

namespace madelab::testing {

// Random strictly-interior policy (Dirichlet rows).
inline Policy random_policy(int n_states, int n_actions, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  Policy pi;
  pi.probs = Matrix::Zero(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    Vector row(n_actions);
    for (int a = 0; a < n_actions; ++a) row(a) = expo(rng);
    pi.probs.row(s) = (row / row.sum()).transpose();
  }
  return pi;
}

// Deterministic 2-state cycle s0 -> s1 -> s0, one action.
inline TabularMdp two_state_cycle(double gamma = 0.5) {
  TabularMdp mdp;
  mdp.n_states = 2;
  mdp.n_actions = 1;
  mdp.discount = gamma;
  mdp.transition.assign(1, Matrix::Zero(2, 2));
  mdp.transition[0](0, 1) = 1.0;
  mdp.transition[0](1, 0) = 1.0;
  mdp.reward = Matrix::Zero(2, 1);
  mdp.initial = Vector::Zero(2);
  mdp.initial(0) = 1.0;
  return mdp;
}

inline Policy always_action(int n_states, int n_actions, int action) {
  return Policy::deterministic(std::vector<int>(n_states, action), n_actions);
}

}  // namespace madelab::testing
