#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "madelab/mdp.hpp"

namespace madelab {

/// Stochastic bidirectional diabolical lock: start state, two parallel chains
/// of H good + H dead states each, and one absorbing terminal state.
struct LockConfig {
  int depth = 5;               // H, good states per chain
  double slip = 0.5;           // p
  double anti_reward = -0.01;  // reward on transiting into a good state
  double big_reward = 1.0;
  double small_reward = 0.1;
  double discount = 0.99;
  std::uint64_t env_seed = 0;  // randomizes big-reward lock and good actions
  bool fixed_good_actions = false;  // debugging: good action is always 0

  void validate() const;
};

/// State indexing helpers for the lock layout.
struct LockLayout {
  int depth = 0;
  int start() const { return 0; }
  // i in [1, depth]
  int good(int lock, int i) const { return 1 + lock * 2 * depth + (i - 1); }
  int dead(int lock, int i) const { return 1 + lock * 2 * depth + depth + (i - 1); }
  int terminal() const { return 4 * depth + 1; }
  int n_states() const { return 4 * depth + 2; }
};

/// Deterministic chain MDP with vanishing policy gradients: a_1 advances,
/// the other three actions move back; the only reward is r(s_{H+1}, a_1) = 1.
struct ChainConfig {
  int depth = 8;  // H; discount is derived as H / (H + 1)

  void validate() const;
};

TabularMdp make_bidirectional_lock(const LockConfig& cfg);
TabularMdp make_chain_mdp(const ChainConfig& cfg);
TabularMdp make_random_mdp(int n_states, int n_actions, std::uint64_t rng_seed,
                           double discount = 0.9);

/// Which lock index carries big_reward for this seed, and the good action at
/// each good state (indexed [lock][i-1]).
struct LockSecrets {
  int big_lock = 0;
  std::vector<std::vector<int>> good_actions;
};
LockSecrets lock_secrets(const LockConfig& cfg);

/// JSON layout: dims, tensors flattened row-major, discount, seed.
std::string mdp_to_json(const TabularMdp& mdp, std::uint64_t seed);
TabularMdp mdp_from_json(const std::string& text);

}  // namespace madelab
