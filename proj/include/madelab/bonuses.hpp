#pragma once

#include <deque>
#include <utility>
#include <vector>

#include "madelab/mdp.hpp"

namespace madelab {

/// Total visit counts N(s, a) plus successor counts N(s, a, s') for the
/// empirical transition model.
struct CountTable {
  Eigen::MatrixXi n;                        // S x A
  std::vector<Eigen::MatrixXi> successors;  // per action, S x S'
  long long total = 0;

  CountTable() = default;
  CountTable(int n_states, int n_actions);

  int n_states() const { return static_cast<int>(n.rows()); }
  int n_actions() const { return static_cast<int>(n.cols()); }
  void record(int s, int a);
  void record(int s, int a, int next_s);
};

/// Ring buffer of the last `capacity` (s, a) pairs with window counts B(s, a).
struct RecentBuffer {
  std::size_t capacity = 1000;
  std::deque<std::pair<int, int>> ring;
  Eigen::MatrixXi b;  // S x A

  RecentBuffer() = default;
  RecentBuffer(int n_states, int n_actions, std::size_t capacity);

  void record(int s, int a);
};

struct BonusConfig {
  double v_max = 1.0;
  double scale = 1.0;

  void validate() const;
};

enum class BonusKind { None, Hoeffding, Bernstein, Made };

const char* bonus_kind_name(BonusKind kind);
BonusKind bonus_kind_from_name(const std::string& name);

/// Updates total counts and the recent window together.
void record(CountTable& counts, RecentBuffer& buffer, int s, int a);

/// b(s, a) = scale * v_max / sqrt(N(s, a)); counts are floored at 1.
Matrix hoeffding_bonus(const CountTable& counts, const BonusConfig& cfg);

/// b(s, a) = scale * (sqrt(Var_{s' ~ P_k(.|s,a)} V(s') / N) + 1 / N) with the
/// empirical model P_k; unvisited pairs behave as N = 1 with zero variance.
Matrix bernstein_bonus(const CountTable& counts, const std::vector<Matrix>& model,
                       const Vector& values, const BonusConfig& cfg);

/// b(s, a) = scale / sqrt(N(s, a) * B(s, a)); both counts floored at 1.
Matrix made_bonus(const CountTable& counts, const RecentBuffer& buffer, const BonusConfig& cfg);

/// P_k(s'|s,a) = N(s,a,s') / N(s,a); unvisited rows default to uniform.
std::vector<Matrix> empirical_model(const CountTable& counts);

}  // namespace madelab
