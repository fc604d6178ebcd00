#include "madelab/learners.hpp"

#include <cmath>
#include <stdexcept>

namespace madelab {

namespace {

int sample_index(const Eigen::Ref<const Vector>& weights, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng) * weights.sum();
  double acc = 0.0;
  for (int i = 0; i < weights.size(); ++i) {
    acc += weights(i);
    if (u <= acc) return i;
  }
  return static_cast<int>(weights.size()) - 1;
}

int greedy_action(const Matrix& q, int s) {
  int best = 0;
  for (int a = 1; a < q.cols(); ++a) {
    if (q(s, a) > q(s, best)) best = a;
  }
  return best;
}

struct ModelState {
  CountTable counts;
  RecentBuffer buffer;
  Matrix reward_sum;
  double optimistic_reward;

  ModelState(int ns, int na, const LearnerConfig& cfg)
      : counts(ns, na),
        buffer(ns, na, cfg.buffer_capacity),
        reward_sum(Matrix::Zero(ns, na)),
        optimistic_reward(cfg.bonus.v_max) {}

  void observe(int s, int a, int next_s, double r) {
    counts.record(s, a, next_s);
    buffer.record(s, a);
    reward_sum(s, a) += r;
  }

  // Empirical mean reward; optimistic default before the first observation.
  Matrix reward_estimate() const {
    const int ns = counts.n_states(), na = counts.n_actions();
    Matrix r(ns, na);
    for (int s = 0; s < ns; ++s) {
      for (int a = 0; a < na; ++a) {
        r(s, a) = counts.n(s, a) > 0 ? reward_sum(s, a) / counts.n(s, a) : optimistic_reward;
      }
    }
    return r;
  }

  Matrix bonus_table(BonusKind kind, const Vector& values, const BonusConfig& cfg) const {
    switch (kind) {
      case BonusKind::None:
        return Matrix::Zero(counts.n_states(), counts.n_actions());
      case BonusKind::Hoeffding:
        return hoeffding_bonus(counts, cfg);
      case BonusKind::Bernstein:
        return bernstein_bonus(counts, empirical_model(counts), values, cfg);
      case BonusKind::Made:
        return made_bonus(counts, buffer, cfg);
    }
    throw std::invalid_argument("unknown bonus kind");
  }
};

void maybe_snapshot(RunRecord& record, const ModelState& model, int iteration, int period,
                    long long cum_steps) {
  if (iteration % period == 0) {
    record.count_snapshots.emplace_back(cum_steps, model.counts.n);
  }
}

Matrix greedy_policy_of(const Matrix& q) {
  Matrix pi = Matrix::Zero(q.rows(), q.cols());
  for (int s = 0; s < q.rows(); ++s) pi(s, greedy_action(q, s)) = 1.0;
  return pi;
}

}  // namespace

EnvHandle make_env_handle(const TabularMdp& mdp, std::optional<int> terminal) {
  EnvHandle env;
  env.n_states = mdp.n_states;
  env.n_actions = mdp.n_actions;
  env.terminal_state = terminal;
  env.reset = [mdp](std::mt19937_64& rng) { return sample_index(mdp.initial, rng); };
  env.step = [mdp](int s, int a, std::mt19937_64& rng) {
    const int next = sample_index(mdp.transition[a].row(s).transpose(), rng);
    return std::make_pair(next, mdp.reward(s, a));
  };
  return env;
}

void LearnerConfig::validate() const {
  if (episodes < 1 || max_episode_steps < 1) {
    throw std::invalid_argument("LearnerConfig: counts must be >= 1");
  }
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw std::invalid_argument("LearnerConfig: discount must be in [0, 1)");
  }
  if (plan_tol <= 0.0) throw std::invalid_argument("LearnerConfig: plan_tol must be positive");
  if (heatmap_period < 1) throw std::invalid_argument("LearnerConfig: heatmap_period must be >= 1");
  bonus.validate();
}

int LearnerConfig::effective_horizon() const {
  if (q_learning_rate_horizon > 0) return q_learning_rate_horizon;
  // Small slack so 1 / (1 - 0.9) rounds to 10, not ceil(10 + ulp) = 11.
  return static_cast<int>(std::ceil(1.0 / (1.0 - discount) - 1e-9));
}

double LearnerConfig::ppo_step_size(int n_actions) const {
  return std::sqrt(2.0 * std::log(static_cast<double>(n_actions)) /
                   (static_cast<double>(max_episode_steps) * ppo_iters()));
}

RunRecord run_vi_agent(const EnvHandle& env, BonusKind bonus_kind, const LearnerConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  ModelState model(env.n_states, env.n_actions, cfg);
  RunRecord record;
  Matrix q = Matrix::Zero(env.n_states, env.n_actions);

  // Planning MDP over the empirical model; rewards swapped in per episode.
  TabularMdp plan_mdp;
  plan_mdp.n_states = env.n_states;
  plan_mdp.n_actions = env.n_actions;
  plan_mdp.discount = cfg.discount;
  plan_mdp.initial = Vector::Constant(env.n_states, 1.0 / env.n_states);

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    maybe_snapshot(record, model, ep, cfg.heatmap_period, record.total_steps);

    const Vector values = q.rowwise().maxCoeff();
    const Matrix bonus = model.bonus_table(bonus_kind, values, cfg.bonus);
    record.bonus_trace.emplace_back(record.total_steps, bonus);
    plan_mdp.transition = empirical_model(model.counts);
    plan_mdp.reward = model.reward_estimate() + bonus;
    const PlanResult plan = value_iteration_plan(plan_mdp, cfg.plan_tol, &q);
    q = plan.q;
    record.policy_snapshots.emplace_back(record.total_steps, greedy_policy_of(q));

    double ep_return = 0.0;
    int s = env.reset(rng);
    for (int t = 0; t < cfg.max_episode_steps; ++t) {
      if (env.terminal_state && s == *env.terminal_state) break;
      const int a = greedy_action(q, s);
      const auto [next, r] = env.step(s, a, rng);
      model.observe(s, a, next, r);
      record.total_steps += 1;
      record.steps.push_back({ep, t, s, a, r, bonus(s, a), record.total_steps});
      ep_return += r;
      s = next;
    }
    record.episode_returns.push_back(ep_return);
    record.episode_end_steps.push_back(record.total_steps);
  }
  record.count_snapshots.emplace_back(record.total_steps, model.counts.n);
  record.bonus_trace.emplace_back(
      record.total_steps, model.bonus_table(bonus_kind, q.rowwise().maxCoeff(), cfg.bonus));
  record.policy_snapshots.emplace_back(record.total_steps, greedy_policy_of(q));
  return record;
}

RunRecord run_ppo_agent(const EnvHandle& env, BonusKind bonus_kind, const LearnerConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  ModelState model(env.n_states, env.n_actions, cfg);
  RunRecord record;
  Policy pi = Policy::uniform(env.n_states, env.n_actions);
  const double alpha = cfg.ppo_step_size(env.n_actions);
  const int iters = cfg.ppo_iters();

  TabularMdp plan_mdp;
  plan_mdp.n_states = env.n_states;
  plan_mdp.n_actions = env.n_actions;
  plan_mdp.discount = cfg.discount;
  plan_mdp.initial = Vector::Constant(env.n_states, 1.0 / env.n_states);

  for (int k = 0; k < iters; ++k) {
    maybe_snapshot(record, model, k, cfg.heatmap_period, record.total_steps);
    record.policy_snapshots.emplace_back(record.total_steps, pi.probs);

    // (1) sample one trajectory with the stochastic policy.
    double ep_return = 0.0;
    int s = env.reset(rng);
    for (int t = 0; t < cfg.max_episode_steps; ++t) {
      if (env.terminal_state && s == *env.terminal_state) break;
      const int a = sample_index(pi.probs.row(s).transpose(), rng);
      const auto [next, r] = env.step(s, a, rng);
      model.observe(s, a, next, r);
      record.total_steps += 1;
      record.steps.push_back({k, t, s, a, r, 0.0, record.total_steps});
      ep_return += r;
      s = next;
    }
    record.episode_returns.push_back(ep_return);
    record.episode_end_steps.push_back(record.total_steps);

    // (2) refresh model and bonus; Bernstein uses V^{pi_k} on the model MDP.
    plan_mdp.transition = empirical_model(model.counts);
    plan_mdp.reward = model.reward_estimate();
    const Vector v_pi = evaluate_policy(plan_mdp, pi);
    const Matrix bonus = model.bonus_table(bonus_kind, v_pi, cfg.bonus);
    record.bonus_trace.emplace_back(record.total_steps, bonus);

    // (3) evaluate Q_k of pi_k on (P_k, r_hat + bonus).
    plan_mdp.reward += bonus;
    const Matrix q = q_of_policy(plan_mdp, pi);

    // (4) multiplicative-weights update, row-wise max shift for stability.
    for (int state = 0; state < env.n_states; ++state) {
      const Eigen::ArrayXd shifted =
          alpha * (q.row(state).array() - q.row(state).maxCoeff());
      const Eigen::ArrayXd next = pi.probs.row(state).transpose().array() * shifted.exp();
      pi.probs.row(state) = (next / next.sum()).transpose();
    }
  }
  record.count_snapshots.emplace_back(record.total_steps, model.counts.n);
  plan_mdp.transition = empirical_model(model.counts);
  plan_mdp.reward = model.reward_estimate();
  record.bonus_trace.emplace_back(
      record.total_steps, model.bonus_table(bonus_kind, evaluate_policy(plan_mdp, pi), cfg.bonus));
  record.policy_snapshots.emplace_back(record.total_steps, pi.probs);
  return record;
}

RunRecord run_q_agent(const EnvHandle& env, BonusKind bonus_kind, const LearnerConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  ModelState model(env.n_states, env.n_actions, cfg);
  RunRecord record;
  const int h_eff = cfg.effective_horizon();
  Matrix q = Matrix::Constant(env.n_states, env.n_actions,
                              cfg.bonus.v_max / (1.0 - cfg.discount));
  Eigen::MatrixXi visits = Eigen::MatrixXi::Zero(env.n_states, env.n_actions);

  // Scalar bonus for the updated pair only; avoids rebuilding whole tables.
  auto pair_bonus = [&](int s, int a) {
    switch (bonus_kind) {
      case BonusKind::None:
        return 0.0;
      case BonusKind::Hoeffding:
        return cfg.bonus.scale * cfg.bonus.v_max / std::sqrt(std::max(model.counts.n(s, a), 1));
      case BonusKind::Made: {
        const double n = std::max(model.counts.n(s, a), 1);
        const double b = std::max(model.buffer.b(s, a), 1);
        return cfg.bonus.scale / std::sqrt(n * b);
      }
      case BonusKind::Bernstein: {
        const double n = std::max(model.counts.n(s, a), 1);
        double variance = 0.0;
        if (model.counts.n(s, a) > 0) {
          const Vector row =
              model.counts.successors[a].row(s).cast<double>().transpose() / n;
          const Vector v = q.rowwise().maxCoeff();
          const double mean = row.dot(v);
          variance = std::max(0.0, row.dot((v.array() - mean).square().matrix()));
        }
        return cfg.bonus.scale * (std::sqrt(variance / n) + 1.0 / n);
      }
    }
    return 0.0;
  };

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    maybe_snapshot(record, model, ep, cfg.heatmap_period, record.total_steps);
    if (ep % cfg.heatmap_period == 0) {
      const Vector values = q.rowwise().maxCoeff();
      record.bonus_trace.emplace_back(record.total_steps,
                                      model.bonus_table(bonus_kind, values, cfg.bonus));
    }
    record.policy_snapshots.emplace_back(record.total_steps, greedy_policy_of(q));

    double ep_return = 0.0;
    int s = env.reset(rng);
    for (int t = 0; t < cfg.max_episode_steps; ++t) {
      if (env.terminal_state && s == *env.terminal_state) break;
      const int a = greedy_action(q, s);
      const auto [next, r] = env.step(s, a, rng);
      model.observe(s, a, next, r);
      visits(s, a) += 1;
      const double step_size =
          static_cast<double>(h_eff + 1) / (h_eff + visits(s, a));
      const double b = pair_bonus(s, a);
      q(s, a) = (1.0 - step_size) * q(s, a) +
                step_size * (r + b + cfg.discount * q.row(next).maxCoeff());
      record.total_steps += 1;
      record.steps.push_back({ep, t, s, a, r, b, record.total_steps});
      ep_return += r;
      s = next;
    }
    record.episode_returns.push_back(ep_return);
    record.episode_end_steps.push_back(record.total_steps);
  }
  record.count_snapshots.emplace_back(record.total_steps, model.counts.n);
  record.bonus_trace.emplace_back(
      record.total_steps, model.bonus_table(bonus_kind, q.rowwise().maxCoeff(), cfg.bonus));
  record.policy_snapshots.emplace_back(record.total_steps, greedy_policy_of(q));
  return record;
}

}  // namespace madelab
