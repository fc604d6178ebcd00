#include "madelab/envs.hpp"

#include <json.hpp>
#include <random>
#include <stdexcept>

namespace madelab {

void LockConfig::validate() const {
  if (depth < 1) throw std::invalid_argument("LockConfig: depth must be >= 1");
  if (!(slip >= 0.0 && slip < 1.0)) throw std::invalid_argument("LockConfig: slip must be in [0, 1)");
  if (!(big_reward > small_reward && small_reward > 0.0)) {
    throw std::invalid_argument("LockConfig: need big_reward > small_reward > 0");
  }
  if (anti_reward > 0.0) throw std::invalid_argument("LockConfig: anti_reward must be <= 0");
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw std::invalid_argument("LockConfig: discount must be in [0, 1)");
  }
}

void ChainConfig::validate() const {
  if (depth < 1) throw std::invalid_argument("ChainConfig: depth must be >= 1");
}

LockSecrets lock_secrets(const LockConfig& cfg) {
  std::mt19937_64 rng(cfg.env_seed);
  std::uniform_int_distribution<int> coin(0, 1);
  LockSecrets secrets;
  secrets.big_lock = coin(rng);
  secrets.good_actions.assign(2, std::vector<int>(cfg.depth, 0));
  if (!cfg.fixed_good_actions) {
    for (int lock = 0; lock < 2; ++lock) {
      for (int i = 0; i < cfg.depth; ++i) {
        secrets.good_actions[lock][i] = coin(rng);
      }
    }
  }
  return secrets;
}

TabularMdp make_bidirectional_lock(const LockConfig& cfg) {
  cfg.validate();
  const int h = cfg.depth;
  const double p = cfg.slip;
  const LockLayout at{h};
  const LockSecrets secrets = lock_secrets(cfg);

  TabularMdp mdp;
  mdp.n_states = at.n_states();
  mdp.n_actions = 2;
  mdp.discount = cfg.discount;
  mdp.transition.assign(2, Matrix::Zero(mdp.n_states, mdp.n_states));
  mdp.reward = Matrix::Zero(mdp.n_states, 2);
  mdp.initial = Vector::Zero(mdp.n_states);
  mdp.initial(at.start()) = 1.0;

  // Start: action a selects lock a; slips into the dead chain w.p. p.
  for (int a = 0; a < 2; ++a) {
    mdp.transition[a](at.start(), at.good(a, 1)) = 1.0 - p;
    mdp.transition[a](at.start(), at.dead(a, 1)) = p;
    mdp.reward(at.start(), a) = (1.0 - p) * cfg.anti_reward;
  }

  for (int lock = 0; lock < 2; ++lock) {
    const double end_reward = lock == secrets.big_lock ? cfg.big_reward : cfg.small_reward;
    for (int i = 1; i <= h; ++i) {
      const int good_action = secrets.good_actions[lock][i - 1];
      const int bad_action = 1 - good_action;
      const int s = at.good(lock, i);
      if (i < h) {
        mdp.transition[good_action](s, at.good(lock, i + 1)) = 1.0 - p;
        mdp.transition[good_action](s, at.dead(lock, i + 1)) = p;
        mdp.reward(s, good_action) = (1.0 - p) * cfg.anti_reward;
        mdp.transition[bad_action](s, at.dead(lock, i + 1)) = 1.0;
      } else {
        mdp.transition[good_action](s, at.terminal()) = 1.0;
        mdp.reward(s, good_action) = end_reward;
        mdp.transition[bad_action](s, at.terminal()) = 1.0;
      }
      // Dead chain: deterministic, reward-free, inescapable.
      const int d = at.dead(lock, i);
      const int next = i < h ? at.dead(lock, i + 1) : at.terminal();
      mdp.transition[0](d, next) = 1.0;
      mdp.transition[1](d, next) = 1.0;
    }
  }
  mdp.transition[0](at.terminal(), at.terminal()) = 1.0;
  mdp.transition[1](at.terminal(), at.terminal()) = 1.0;

  mdp.validate();
  return mdp;
}

TabularMdp make_chain_mdp(const ChainConfig& cfg) {
  cfg.validate();
  const int h = cfg.depth;
  TabularMdp mdp;
  mdp.n_states = h + 2;
  mdp.n_actions = 4;
  mdp.discount = static_cast<double>(h) / (h + 1);
  mdp.transition.assign(4, Matrix::Zero(mdp.n_states, mdp.n_states));
  mdp.reward = Matrix::Zero(mdp.n_states, 4);
  mdp.initial = Vector::Zero(mdp.n_states);
  mdp.initial(0) = 1.0;

  for (int s = 0; s < mdp.n_states; ++s) {
    const int forward = s < h + 1 ? s + 1 : s;
    const int backward = s > 0 ? s - 1 : 0;
    mdp.transition[0](s, forward) = 1.0;
    for (int a = 1; a < 4; ++a) {
      mdp.transition[a](s, backward) = 1.0;
    }
  }
  mdp.reward(h + 1, 0) = 1.0;
  mdp.validate();
  return mdp;
}

TabularMdp make_random_mdp(int n_states, int n_actions, std::uint64_t rng_seed, double discount) {
  if (n_states < 1 || n_actions < 1) {
    throw std::invalid_argument("make_random_mdp: dims must be >= 1");
  }
  std::mt19937_64 rng(rng_seed);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  TabularMdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.discount = discount;
  mdp.transition.assign(n_actions, Matrix::Zero(n_states, n_states));
  mdp.reward = Matrix::Zero(n_states, n_actions);
  mdp.initial = Vector::Constant(n_states, 1.0 / n_states);
  for (int a = 0; a < n_actions; ++a) {
    for (int s = 0; s < n_states; ++s) {
      Vector row(n_states);
      for (int t = 0; t < n_states; ++t) row(t) = expo(rng);  // Dirichlet(1, ..., 1)
      mdp.transition[a].row(s) = (row / row.sum()).transpose();
      mdp.reward(s, a) = unif(rng);
    }
  }
  mdp.validate();
  return mdp;
}

std::string mdp_to_json(const TabularMdp& mdp, std::uint64_t seed) {
  nlohmann::json j;
  j["n_states"] = mdp.n_states;
  j["n_actions"] = mdp.n_actions;
  j["discount"] = mdp.discount;
  j["seed"] = seed;
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(mdp.n_actions) * mdp.n_states * mdp.n_states);
  for (int a = 0; a < mdp.n_actions; ++a) {
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int t = 0; t < mdp.n_states; ++t) flat.push_back(mdp.transition[a](s, t));
    }
  }
  j["transition"] = flat;  // [a][s][s'] row-major
  std::vector<double> r;
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) r.push_back(mdp.reward(s, a));
  }
  j["reward"] = r;  // [s][a] row-major
  j["initial"] = std::vector<double>(mdp.initial.data(), mdp.initial.data() + mdp.n_states);
  return j.dump(2);
}

TabularMdp mdp_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  TabularMdp mdp;
  mdp.n_states = j.at("n_states").get<int>();
  mdp.n_actions = j.at("n_actions").get<int>();
  mdp.discount = j.at("discount").get<double>();
  const auto flat = j.at("transition").get<std::vector<double>>();
  const auto r = j.at("reward").get<std::vector<double>>();
  const auto rho = j.at("initial").get<std::vector<double>>();
  mdp.transition.assign(mdp.n_actions, Matrix::Zero(mdp.n_states, mdp.n_states));
  std::size_t idx = 0;
  for (int a = 0; a < mdp.n_actions; ++a) {
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int t = 0; t < mdp.n_states; ++t) mdp.transition[a](s, t) = flat.at(idx++);
    }
  }
  mdp.reward = Matrix::Zero(mdp.n_states, mdp.n_actions);
  idx = 0;
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) mdp.reward(s, a) = r.at(idx++);
  }
  mdp.initial = Eigen::Map<const Vector>(rho.data(), mdp.n_states);
  mdp.validate();
  return mdp;
}

}  // namespace madelab
