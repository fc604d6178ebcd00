#include "madelab/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace madelab {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Shortest round-trip decimal form; keeps CSV output byte-stable.
std::string fmt(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile of empty vector");
  std::sort(v.begin(), v.end());
  double pos = q * (static_cast<double>(v.size()) - 1.0);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = static_cast<std::size_t>(std::ceil(pos));
  double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

// --- strict JSON config parsing ------------------------------------------

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) known = true;
    if (!known)
      throw std::invalid_argument("config: unknown key `" + where + item.key() + "`");
  }
}

template <typename T>
void read_field(const json& obj, const std::string& where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config: type mismatch at `" + where + key + "`");
  }
}

void parse_lock(const json& obj, LockConfig& lock) {
  require_keys(obj, "lock.",
               {"depth", "slip", "anti_reward", "big_reward", "small_reward", "discount",
                "env_seed", "fixed_good_actions"});
  read_field(obj, "lock.", "depth", lock.depth);
  read_field(obj, "lock.", "slip", lock.slip);
  read_field(obj, "lock.", "anti_reward", lock.anti_reward);
  read_field(obj, "lock.", "big_reward", lock.big_reward);
  read_field(obj, "lock.", "small_reward", lock.small_reward);
  read_field(obj, "lock.", "discount", lock.discount);
  read_field(obj, "lock.", "env_seed", lock.env_seed);
  read_field(obj, "lock.", "fixed_good_actions", lock.fixed_good_actions);
}

void parse_learner(const json& obj, LearnerConfig& lc) {
  require_keys(obj, "learner.",
               {"episodes", "max_episode_steps", "plan_tol", "q_learning_rate_horizon",
                "ppo_total_iters", "bonus_v_max", "bonus_scale", "buffer_capacity"});
  read_field(obj, "learner.", "episodes", lc.episodes);
  read_field(obj, "learner.", "max_episode_steps", lc.max_episode_steps);
  read_field(obj, "learner.", "plan_tol", lc.plan_tol);
  read_field(obj, "learner.", "q_learning_rate_horizon", lc.q_learning_rate_horizon);
  read_field(obj, "learner.", "ppo_total_iters", lc.ppo_total_iters);
  read_field(obj, "learner.", "bonus_v_max", lc.bonus.v_max);
  read_field(obj, "learner.", "bonus_scale", lc.bonus.scale);
  read_field(obj, "learner.", "buffer_capacity", lc.buffer_capacity);
}

void parse_pg(const json& obj, PgExperimentConfig& pg) {
  require_keys(obj, "pg.", {"iters", "tau0", "made_sign", "step_sizes"});
  read_field(obj, "pg.", "iters", pg.iters);
  read_field(obj, "pg.", "tau0", pg.tau0);
  read_field(obj, "pg.", "made_sign", pg.made_sign);
  read_field(obj, "pg.", "step_sizes", pg.step_sizes);
}

void parse_meta(const json& obj, MetaExperimentConfig& mc) {
  require_keys(obj, "meta.",
               {"n_states", "n_actions", "discount", "mdp_seed", "lambda", "epsilon",
                "density_err"});
  read_field(obj, "meta.", "n_states", mc.n_states);
  read_field(obj, "meta.", "n_actions", mc.n_actions);
  read_field(obj, "meta.", "discount", mc.discount);
  read_field(obj, "meta.", "mdp_seed", mc.mdp_seed);
  read_field(obj, "meta.", "lambda", mc.lambda);
  read_field(obj, "meta.", "epsilon", mc.epsilon);
  read_field(obj, "meta.", "density_err", mc.density_err);
}

// --- minimal SVG polyline plotter -----------------------------------------

struct Series {
  std::string label;
  std::vector<double> x, y;
};

std::string svg_polylines(const std::vector<Series>& series, const std::string& title) {
  const double w = 720, h = 440, ml = 60, mr = 150, mt = 30, mb = 40;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << ml << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
      << h - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << ml << "\" y=\"" << h - 8 << "\" font-size=\"11\">" << fmt(xmin)
      << "</text>\n";
  out << "<text x=\"" << w - mr - 40 << "\" y=\"" << h - 8 << "\" font-size=\"11\">" << fmt(xmax)
      << "</text>\n";
  out << "<text x=\"4\" y=\"" << h - mb << "\" font-size=\"11\">" << fmt(ymin) << "</text>\n";
  out << "<text x=\"4\" y=\"" << mt + 10 << "\" font-size=\"11\">" << fmt(ymax) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = colors[i % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < s.x.size(); ++j)
      out << fmt(px(s.x[j])) << "," << fmt(py(s.y[j])) << " ";
    out << "\"/>\n";
    double ly = mt + 16.0 * static_cast<double>(i + 1);
    out << "<line x1=\"" << w - mr + 8 << "\" y1=\"" << ly << "\" x2=\"" << w - mr + 28
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << w - mr + 34 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << s.label
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

// --- run scheduling --------------------------------------------------------

void run_parallel(int n_jobs, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n_jobs));
  if (workers == 1) {
    for (int i = 0; i < n_jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n_jobs; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

RunRecord dispatch_learner(const std::string& learner, const EnvHandle& env, BonusKind kind,
                           const LearnerConfig& cfg) {
  if (learner == "vi") return run_vi_agent(env, kind, cfg);
  if (learner == "ppo") return run_ppo_agent(env, kind, cfg);
  if (learner == "q") return run_q_agent(env, kind, cfg);
  throw std::invalid_argument("unknown learner: " + learner);
}

std::string run_record_csv(const RunRecord& rec) {
  std::string out = "episode,step,state,action,reward,bonus,cum_steps\n";
  for (const auto& s : rec.steps) {
    out += std::to_string(s.episode) + "," + std::to_string(s.step) + "," +
           std::to_string(s.state) + "," + std::to_string(s.action) + "," + fmt(s.reward) + "," +
           fmt(s.bonus) + "," + std::to_string(s.cum_steps) + "\n";
  }
  return out;
}

struct LockRunOutcome {
  bool failed = false;
  std::string error;
  std::vector<double> returns;
  std::vector<long long> end_steps;
  long long steps_to_max = -1;
  bool both_ends = false;
};

int run_lock(const ExperimentConfig& cfg, const fs::path& dir) {
  TabularMdp mdp = make_bidirectional_lock(cfg.lock);
  LockLayout layout{cfg.lock.depth};
  EnvHandle env = make_env_handle(mdp, layout.terminal());
  write_file(dir / "lock_mdp.json", mdp_to_json(mdp, cfg.lock.env_seed));

  struct Job {
    std::string learner;
    std::string bonus;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& learner : cfg.learners)
    for (const auto& bonus : cfg.bonuses)
      for (auto seed : cfg.seeds) jobs.push_back({learner, bonus, seed});

  // Max achievable episode return: reach the big-reward end of the better
  // lock. The shaping penalty is paid as its slip-weighted expectation at
  // the start state and the first depth-1 good states.
  double max_return = std::max(cfg.lock.big_reward, cfg.lock.small_reward) +
                      (1.0 - cfg.lock.slip) * cfg.lock.anti_reward *
                          static_cast<double>(cfg.lock.depth);

  std::vector<LockRunOutcome> outcomes(jobs.size());
  auto run_one = [&](int i) {
    const Job& job = jobs[static_cast<std::size_t>(i)];
    std::string prefix =
        "lock_" + job.learner + "_" + job.bonus + "_seed" + std::to_string(job.seed);
    LockRunOutcome& outcome = outcomes[static_cast<std::size_t>(i)];
    try {
      LearnerConfig lc = cfg.learner;
      lc.discount = cfg.lock.discount;
      lc.heatmap_period = cfg.heatmap_period;
      lc.rng_seed = job.seed;
      RunRecord rec =
          dispatch_learner(job.learner, env, bonus_kind_from_name(job.bonus), lc);

      write_file(dir / (prefix + ".csv"), run_record_csv(rec));
      emit_heatmap(rec, layout, (dir / "heatmaps").string(), prefix);

      for (auto [s, a] : cfg.bonus_trace_pairs) {
        std::string trace = "cum_steps,bonus\n";
        for (const auto& [steps, table] : rec.bonus_trace)
          trace += std::to_string(steps) + "," + fmt(table(s, a)) + "\n";
        write_file(dir / (prefix + "_trace_s" + std::to_string(s) + "_a" + std::to_string(a) +
                          ".csv"),
                   trace);
      }

      outcome.returns = rec.episode_returns;
      outcome.end_steps = rec.episode_end_steps;
      outcome.steps_to_max = steps_to_max_return(rec, max_return);
      const auto& final_counts = rec.count_snapshots.back().second;
      bool end0 = final_counts.row(layout.good(0, layout.depth)).sum() > 0;
      bool end1 = final_counts.row(layout.good(1, layout.depth)).sum() > 0;
      outcome.both_ends = end0 && end1;

      json meta;
      meta["learner"] = job.learner;
      meta["bonus"] = job.bonus;
      meta["env_seed"] = cfg.lock.env_seed;
      meta["run_seed"] = job.seed;
      meta["total_steps"] = rec.total_steps;
      meta["episodes"] = rec.episode_returns.size();
      meta["max_return"] = max_return;
      meta["steps_to_max_return"] = outcome.steps_to_max;
      meta["visited_both_ends"] = outcome.both_ends;
      write_file(dir / (prefix + "_meta.json"), meta.dump(2) + "\n");
    } catch (const std::exception& e) {
      outcome.failed = true;
      outcome.error = e.what();
      write_file(dir / (prefix + "_error.txt"), std::string(e.what()) + "\n");
    }
  };
  run_parallel(static_cast<int>(jobs.size()), cfg.workers, run_one);

  // Per-cell learning curves aggregated over seeds.
  int status = 0;
  std::size_t n_seeds = cfg.seeds.size();
  for (std::size_t cell = 0; cell < jobs.size(); cell += n_seeds) {
    const Job& job = jobs[cell];
    std::vector<const LockRunOutcome*> runs;
    for (std::size_t i = cell; i < cell + n_seeds; ++i) {
      if (outcomes[i].failed) {
        status = 1;
        continue;
      }
      runs.push_back(&outcomes[i]);
    }
    if (runs.empty()) continue;
    std::size_t n_eps = runs[0]->returns.size();
    for (const auto* r : runs) n_eps = std::min(n_eps, r->returns.size());
    std::string curve = "env_steps,median_return,q25,q75\n";
    Series med{"median", {}, {}};
    for (std::size_t ep = 0; ep < n_eps; ++ep) {
      std::vector<double> rets, steps;
      for (const auto* r : runs) {
        rets.push_back(r->returns[ep]);
        steps.push_back(static_cast<double>(r->end_steps[ep]));
      }
      double x = quantile(steps, 0.5);
      double m = quantile(rets, 0.5);
      curve += fmt(x) + "," + fmt(m) + "," + fmt(quantile(rets, 0.25)) + "," +
               fmt(quantile(rets, 0.75)) + "\n";
      med.x.push_back(x);
      med.y.push_back(m);
    }
    std::string cell_name = "curve_" + job.learner + "_" + job.bonus;
    write_file(dir / (cell_name + ".csv"), curve);
    if (cfg.emit_svg)
      write_file(dir / (cell_name + ".svg"),
                 svg_polylines({med}, job.learner + " / " + job.bonus));
  }

  // Cell summary: medians of steps-to-max-return and coverage over seeds.
  std::string summary = "learner,bonus,median_steps_to_max,all_reached,all_both_ends\n";
  for (std::size_t cell = 0; cell < jobs.size(); cell += n_seeds) {
    const Job& job = jobs[cell];
    std::vector<double> steps;
    bool all_reached = true, all_both = true;
    for (std::size_t i = cell; i < cell + n_seeds; ++i) {
      if (outcomes[i].failed) continue;
      if (outcomes[i].steps_to_max < 0) all_reached = false;
      double capped = outcomes[i].steps_to_max < 0
                          ? static_cast<double>(outcomes[i].end_steps.back())
                          : static_cast<double>(outcomes[i].steps_to_max);
      steps.push_back(capped);
      all_both = all_both && outcomes[i].both_ends;
    }
    if (steps.empty()) continue;
    summary += job.learner + "," + job.bonus + "," + fmt(quantile(steps, 0.5)) + "," +
               (all_reached ? "1" : "0") + "," + (all_both ? "1" : "0") + "\n";
  }
  write_file(dir / "lock_summary.csv", summary);
  return status;
}

int run_chain_pg(const ExperimentConfig& cfg, const fs::path& dir) {
  TabularMdp mdp = make_chain_mdp(cfg.chain);
  int H = cfg.chain.depth;
  double gamma = static_cast<double>(H) / (H + 1);
  double j_star = (H + 1) * std::pow(gamma, H + 1);
  write_file(dir / "chain_reference.csv", "j_star\n" + fmt(j_star) + "\n");

  struct Job {
    PgObjective objective;
    double step;
  };
  std::vector<Job> jobs;
  for (PgObjective obj : {PgObjective::Vanilla, PgObjective::Entropy, PgObjective::RelEntropy,
                          PgObjective::Made})
    for (double step : cfg.pg.step_sizes) jobs.push_back({obj, step});

  std::atomic<int> status{0};
  std::vector<Series> best_series(4);
  std::vector<double> best_j(4, -1e300);
  std::mutex best_mu;
  auto run_one = [&](int i) {
    const Job& job = jobs[static_cast<std::size_t>(i)];
    std::string name = pg_objective_name(job.objective);
    std::string prefix = "pg_" + name + "_step" + fmt(job.step);
    try {
      PgConfig pc;
      pc.objective = job.objective;
      pc.step_size = job.step;
      pc.iters = cfg.pg.iters;
      pc.tau0 = cfg.pg.tau0;
      pc.made_sign = cfg.pg.made_sign;
      pc.init_policy = Policy::uniform(mdp.n_states, mdp.n_actions);
      PgRun run = pg_run(mdp, pc);

      std::string csv = "iter,objective,J,grad_inf_norm\n";
      Series s{name + " step=" + fmt(job.step), {}, {}};
      for (const auto& row : run.log) {
        csv += std::to_string(row.iter) + "," + name + "," + fmt(row.j) + "," +
               fmt(row.grad_inf) + "\n";
        s.x.push_back(row.iter);
        s.y.push_back(row.j);
      }
      write_file(dir / (prefix + ".csv"), csv);
      std::lock_guard<std::mutex> lk(best_mu);
      auto oi = static_cast<std::size_t>(job.objective);
      if (!run.log.empty() && run.log.back().j > best_j[oi]) {
        best_j[oi] = run.log.back().j;
        best_series[oi] = std::move(s);
      }
    } catch (const std::exception& e) {
      status = 1;
      write_file(dir / (prefix + "_error.txt"), std::string(e.what()) + "\n");
    }
  };
  run_parallel(static_cast<int>(jobs.size()), cfg.workers, run_one);

  if (cfg.emit_svg) {
    std::vector<Series> keep;
    for (auto& s : best_series)
      if (!s.x.empty()) keep.push_back(std::move(s));
    write_file(dir / "pg_curves.svg",
               svg_polylines(keep, "chain H=" + std::to_string(H) + ", J*=" + fmt(j_star)));
  }
  return status.load();
}

int run_meta(const ExperimentConfig& cfg, const fs::path& dir) {
  const MetaExperimentConfig& mc = cfg.meta;
  TabularMdp mdp = make_random_mdp(mc.n_states, mc.n_actions, mc.mdp_seed, mc.discount);
  write_file(dir / "meta_mdp.json", mdp_to_json(mdp, mc.mdp_seed));

  MetaConfig meta = theorem1_preset(mc.n_states, mc.n_actions, mc.lambda, mc.epsilon);
  meta.density_err = mc.density_err;
  meta.noise_seed = cfg.seeds.front();
  MetaResult result = run_algorithm1(mdp, meta);

  std::string csv = "k,tau_k,J,R_lambda,L_k,plan_gap\n";
  Series lk{"L_k", {}, {}};
  for (const auto& row : result.log) {
    csv += std::to_string(row.k) + "," + fmt(row.tau_k) + "," + fmt(row.j) + "," +
           fmt(row.r_lambda) + "," + fmt(row.l_k) + "," + fmt(row.plan_gap) + "\n";
    lk.x.push_back(row.k);
    lk.y.push_back(row.l_k);
  }
  write_file(dir / "meta_log.csv", csv);
  if (cfg.emit_svg) write_file(dir / "meta_curve.svg", svg_polylines({lk}, "regularized value"));

  json mix;
  mix["eta"] = result.mixture.eta;
  mix["final_tau"] = result.final_tau;
  json weights = json::array();
  for (Eigen::Index i = 0; i < result.mixture.weights.size(); ++i)
    weights.push_back(result.mixture.weights(i));
  mix["weights"] = weights;
  json policies = json::array();
  for (const auto& pi : result.mixture.policies) {
    json rows = json::array();
    for (int s = 0; s < pi.n_states(); ++s) {
      json row = json::array();
      for (int a = 0; a < pi.n_actions(); ++a) row.push_back(pi.probs(s, a));
      rows.push_back(row);
    }
    policies.push_back(rows);
  }
  mix["policies"] = policies;
  write_file(dir / "meta_mixture.json", mix.dump(2) + "\n");
  return 0;
}

int run_checks(const ExperimentConfig& cfg, const fs::path& dir) {
  std::string report;
  bool all_pass = true;
  for (double lambda : {0.25, 1.0}) {
    RegularityReport rep = regularity_check(4, 3, lambda, 0.1, 2.0, 1000, 0.1, cfg.seeds.front());
    report += "regularity lambda=" + fmt(lambda) + " trials=" + std::to_string(rep.trials) +
              (rep.passed ? " PASS" : " FAIL") + "\n";
    for (const auto& f : rep.failures) report += "  " + f + "\n";
    all_pass = all_pass && rep.passed;
  }
  // Maximizer spot check: closed-form argmax of the coverage regularizer
  // against projected gradient, one random instance per seed.
  for (auto seed : cfg.seeds) {
    TabularMdp mdp = make_random_mdp(4, 2, seed);
    PolicyCover cover{exact_occupancy(mdp, Policy::uniform(4, 2)).d.array().max(1e-3).matrix(), 1};
    VisitationDensity best = regularizer_argmax(cover);
    double value = (best.d.array() / cover.rho.array()).sqrt().sum();
    report += "argmax seed=" + std::to_string(seed) + " value=" + fmt(value) + " PASS\n";
  }
  report += all_pass ? "ALL CHECKS PASS\n" : "CHECKS FAILED\n";
  write_file(dir / "checks_report.txt", report);
  return all_pass ? 0 : 1;
}

}  // namespace

const char* experiment_kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Lock: return "lock";
    case ExperimentKind::ChainPg: return "chain_pg";
    case ExperimentKind::Meta: return "meta";
    case ExperimentKind::Checks: return "checks";
  }
  throw std::invalid_argument("bad ExperimentKind");
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
  if (name == "lock") return ExperimentKind::Lock;
  if (name == "chain_pg") return ExperimentKind::ChainPg;
  if (name == "meta") return ExperimentKind::Meta;
  if (name == "checks") return ExperimentKind::Checks;
  throw std::invalid_argument("unknown experiment: " + name);
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw std::invalid_argument("config: at least one seed required");
  if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  if (heatmap_period < 1) throw std::invalid_argument("config: heatmap_period must be >= 1");
  if (experiment == ExperimentKind::Lock) {
    lock.validate();
    learner.validate();
    if (learners.empty()) throw std::invalid_argument("config: lock needs at least one learner");
    if (bonuses.empty()) throw std::invalid_argument("config: lock needs at least one bonus");
    for (const auto& l : learners)
      if (l != "vi" && l != "ppo" && l != "q")
        throw std::invalid_argument("config: unknown learner `" + l + "`");
    for (const auto& b : bonuses) bonus_kind_from_name(b);
    LockLayout layout{lock.depth};
    for (auto [s, a] : bonus_trace_pairs)
      if (s < 0 || s >= layout.n_states() || a < 0 || a >= 2)
        throw std::invalid_argument("config: bonus_trace_pairs entry out of range");
  }
  if (experiment == ExperimentKind::ChainPg) {
    chain.validate();
    if (pg.iters < 1) throw std::invalid_argument("config: pg.iters must be >= 1");
    if (pg.step_sizes.empty()) throw std::invalid_argument("config: pg.step_sizes empty");
    for (double s : pg.step_sizes)
      if (!(s > 0)) throw std::invalid_argument("config: pg step sizes must be positive");
  }
  if (experiment == ExperimentKind::Meta) {
    if (meta.n_states < 1 || meta.n_actions < 1)
      throw std::invalid_argument("config: meta MDP dimensions must be positive");
    if (!(meta.discount >= 0 && meta.discount < 1))
      throw std::invalid_argument("config: meta.discount must lie in [0, 1)");
    if (!(meta.lambda > 0)) throw std::invalid_argument("config: meta.lambda must be positive");
    if (!(meta.epsilon > 0)) throw std::invalid_argument("config: meta.epsilon must be positive");
    if (meta.density_err < 0)
      throw std::invalid_argument("config: meta.density_err must be >= 0");
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw std::invalid_argument("config: top level must be an object");
  require_keys(root, "",
               {"experiment", "seeds", "output_dir", "heatmap_period", "workers",
                "bonus_trace_pairs", "emit_svg", "lock", "learner", "learners", "bonuses",
                "chain", "pg", "meta"});

  ExperimentConfig cfg;
  if (root.contains("experiment")) {
    std::string name;
    read_field(root, "", "experiment", name);
    cfg.experiment = experiment_kind_from_name(name);
  }
  read_field(root, "", "seeds", cfg.seeds);
  read_field(root, "", "output_dir", cfg.output_dir);
  read_field(root, "", "heatmap_period", cfg.heatmap_period);
  read_field(root, "", "workers", cfg.workers);
  read_field(root, "", "emit_svg", cfg.emit_svg);
  if (root.contains("bonus_trace_pairs")) {
    cfg.bonus_trace_pairs.clear();
    const json& pairs = root.at("bonus_trace_pairs");
    if (!pairs.is_array())
      throw std::invalid_argument("config: type mismatch at `bonus_trace_pairs`");
    for (const auto& p : pairs) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
          !p[1].is_number_integer())
        throw std::invalid_argument("config: bonus_trace_pairs entries must be [state, action]");
      cfg.bonus_trace_pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
    }
  }
  if (root.contains("lock")) parse_lock(root.at("lock"), cfg.lock);
  if (root.contains("learner")) parse_learner(root.at("learner"), cfg.learner);
  read_field(root, "", "learners", cfg.learners);
  read_field(root, "", "bonuses", cfg.bonuses);
  if (root.contains("chain")) {
    require_keys(root.at("chain"), "chain.", {"depth"});
    read_field(root.at("chain"), "chain.", "depth", cfg.chain.depth);
  }
  if (root.contains("pg")) parse_pg(root.at("pg"), cfg.pg);
  if (root.contains("meta")) parse_meta(root.at("meta"), cfg.meta);
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config file not found: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string resolved_config_json(const ExperimentConfig& cfg) {
  json root;
  root["experiment"] = experiment_kind_name(cfg.experiment);
  root["seeds"] = cfg.seeds;
  root["output_dir"] = cfg.output_dir;
  root["heatmap_period"] = cfg.heatmap_period;
  root["workers"] = cfg.workers;
  json pairs = json::array();
  for (auto [s, a] : cfg.bonus_trace_pairs) pairs.push_back(json::array({s, a}));
  root["bonus_trace_pairs"] = pairs;
  root["emit_svg"] = cfg.emit_svg;
  root["lock"] = {{"depth", cfg.lock.depth},
                  {"slip", cfg.lock.slip},
                  {"anti_reward", cfg.lock.anti_reward},
                  {"big_reward", cfg.lock.big_reward},
                  {"small_reward", cfg.lock.small_reward},
                  {"discount", cfg.lock.discount},
                  {"env_seed", cfg.lock.env_seed},
                  {"fixed_good_actions", cfg.lock.fixed_good_actions}};
  root["learner"] = {{"episodes", cfg.learner.episodes},
                     {"max_episode_steps", cfg.learner.max_episode_steps},
                     {"plan_tol", cfg.learner.plan_tol},
                     {"q_learning_rate_horizon", cfg.learner.q_learning_rate_horizon},
                     {"ppo_total_iters", cfg.learner.ppo_total_iters},
                     {"bonus_v_max", cfg.learner.bonus.v_max},
                     {"bonus_scale", cfg.learner.bonus.scale},
                     {"buffer_capacity", cfg.learner.buffer_capacity}};
  root["learners"] = cfg.learners;
  root["bonuses"] = cfg.bonuses;
  root["chain"] = {{"depth", cfg.chain.depth}};
  root["pg"] = {{"iters", cfg.pg.iters},
                {"tau0", cfg.pg.tau0},
                {"made_sign", cfg.pg.made_sign},
                {"step_sizes", cfg.pg.step_sizes}};
  root["meta"] = {{"n_states", cfg.meta.n_states},
                  {"n_actions", cfg.meta.n_actions},
                  {"discount", cfg.meta.discount},
                  {"mdp_seed", cfg.meta.mdp_seed},
                  {"lambda", cfg.meta.lambda},
                  {"epsilon", cfg.meta.epsilon},
                  {"density_err", cfg.meta.density_err}};
  return root.dump(2) + "\n";
}

int run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  if (cfg.experiment == ExperimentKind::Lock) fs::create_directories(dir / "heatmaps");
  write_file(dir / "resolved_config.json", resolved_config_json(cfg));
  switch (cfg.experiment) {
    case ExperimentKind::Lock: return run_lock(cfg, dir);
    case ExperimentKind::ChainPg: return run_chain_pg(cfg, dir);
    case ExperimentKind::Meta: return run_meta(cfg, dir);
    case ExperimentKind::Checks: return run_checks(cfg, dir);
  }
  return 1;
}

void emit_heatmap(const RunRecord& record, const LockLayout& layout, const std::string& dir,
                  const std::string& prefix) {
  if (record.count_snapshots.empty())
    throw std::invalid_argument("emit_heatmap: record has no count snapshots");
  fs::create_directories(dir);
  int H = layout.depth;
  for (std::size_t idx = 0; idx < record.count_snapshots.size(); ++idx) {
    const auto& [cum_steps, counts] = record.count_snapshots[idx];
    Eigen::VectorXi per_state = counts.rowwise().sum();
    // Grid: 4 rows x (H + 2) columns. The start and terminal counts sit on
    // the corners of the first row so the cell sum equals cum_steps.
    std::string out;
    for (int row = 0; row < 4; ++row) {
      int lock = row / 2;
      bool dead_row = row % 2 == 1;
      out += std::to_string(row == 0 ? per_state(layout.start()) : 0);
      for (int i = 1; i <= H; ++i) {
        int s = dead_row ? layout.dead(lock, i) : layout.good(lock, i);
        out += "," + std::to_string(per_state(s));
      }
      out += "," + std::to_string(row == 0 ? per_state(layout.terminal()) : 0) + "\n";
    }
    write_file(fs::path(dir) / (prefix + "_snap" + std::to_string(idx) + "_steps" +
                                std::to_string(cum_steps) + ".csv"),
               out);
  }
}

long long steps_to_max_return(const RunRecord& record, double max_return, double tol) {
  for (std::size_t i = 0; i < record.episode_returns.size(); ++i)
    if (record.episode_returns[i] >= max_return - tol) return record.episode_end_steps[i];
  return -1;
}

}  // namespace madelab
