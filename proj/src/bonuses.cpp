#include "madelab/bonuses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace madelab {

CountTable::CountTable(int n_states, int n_actions)
    : n(Eigen::MatrixXi::Zero(n_states, n_actions)),
      successors(n_actions, Eigen::MatrixXi::Zero(n_states, n_states)) {}

void CountTable::record(int s, int a) {
  if (s < 0 || s >= n_states() || a < 0 || a >= n_actions()) {
    throw std::out_of_range("CountTable::record: index out of range");
  }
  n(s, a) += 1;
  total += 1;
}

void CountTable::record(int s, int a, int next_s) {
  record(s, a);
  if (next_s < 0 || next_s >= n_states()) {
    throw std::out_of_range("CountTable::record: successor out of range");
  }
  successors[a](s, next_s) += 1;
}

RecentBuffer::RecentBuffer(int n_states, int n_actions, std::size_t capacity)
    : capacity(capacity), b(Eigen::MatrixXi::Zero(n_states, n_actions)) {}

void RecentBuffer::record(int s, int a) {
  if (s < 0 || s >= b.rows() || a < 0 || a >= b.cols()) {
    throw std::out_of_range("RecentBuffer::record: index out of range");
  }
  ring.emplace_back(s, a);
  b(s, a) += 1;
  if (ring.size() > capacity) {
    const auto [old_s, old_a] = ring.front();
    ring.pop_front();
    b(old_s, old_a) -= 1;
  }
}

void BonusConfig::validate() const {
  // scale 0 is allowed: it turns any bonus kind into the zero bonus.
  if (!(v_max > 0.0 && scale >= 0.0)) {
    throw std::invalid_argument("BonusConfig: v_max must be positive and scale nonnegative");
  }
}

const char* bonus_kind_name(BonusKind kind) {
  switch (kind) {
    case BonusKind::None: return "none";
    case BonusKind::Hoeffding: return "hoeffding";
    case BonusKind::Bernstein: return "bernstein";
    case BonusKind::Made: return "made";
  }
  return "unknown";
}

BonusKind bonus_kind_from_name(const std::string& name) {
  if (name == "none") return BonusKind::None;
  if (name == "hoeffding") return BonusKind::Hoeffding;
  if (name == "bernstein") return BonusKind::Bernstein;
  if (name == "made") return BonusKind::Made;
  throw std::invalid_argument("unknown bonus kind: " + name);
}

void record(CountTable& counts, RecentBuffer& buffer, int s, int a) {
  counts.record(s, a);
  buffer.record(s, a);
}

Matrix hoeffding_bonus(const CountTable& counts, const BonusConfig& cfg) {
  cfg.validate();
  return cfg.scale * cfg.v_max /
         counts.n.cast<double>().cwiseMax(1.0).array().sqrt();
}

Matrix bernstein_bonus(const CountTable& counts, const std::vector<Matrix>& model,
                       const Vector& values, const BonusConfig& cfg) {
  cfg.validate();
  if (!values.allFinite()) {
    throw std::invalid_argument("bernstein_bonus: values must be finite");
  }
  const int ns = counts.n_states();
  const int na = counts.n_actions();
  Matrix bonus(ns, na);
  for (int a = 0; a < na; ++a) {
    for (int s = 0; s < ns; ++s) {
      const double n_sa = std::max(counts.n(s, a), 1);
      double variance = 0.0;
      if (counts.n(s, a) > 0) {
        const double mean = model[a].row(s) * values;
        variance = model[a].row(s) * (values.array() - mean).square().matrix();
        variance = std::max(variance, 0.0);
      }
      bonus(s, a) = cfg.scale * (std::sqrt(variance / n_sa) + 1.0 / n_sa);
    }
  }
  return bonus;
}

Matrix made_bonus(const CountTable& counts, const RecentBuffer& buffer, const BonusConfig& cfg) {
  cfg.validate();
  const Eigen::ArrayXXd n = counts.n.cast<double>().cwiseMax(1.0).array();
  const Eigen::ArrayXXd b = buffer.b.cast<double>().cwiseMax(1.0).array();
  return cfg.scale / (n * b).sqrt();
}

std::vector<Matrix> empirical_model(const CountTable& counts) {
  const int ns = counts.n_states();
  const int na = counts.n_actions();
  std::vector<Matrix> model(na, Matrix::Constant(ns, ns, 1.0 / ns));
  for (int a = 0; a < na; ++a) {
    for (int s = 0; s < ns; ++s) {
      if (counts.n(s, a) > 0) {
        model[a].row(s) =
            counts.successors[a].row(s).cast<double>() / static_cast<double>(counts.n(s, a));
      }
    }
  }
  return model;
}

}  // namespace madelab
