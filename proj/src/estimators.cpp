#include "tidal/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "tidal/errors.hpp"

namespace tidal::est {

namespace {

constexpr std::array<std::pair<StrategyKind, const char*>, 9> kNames{{
    {StrategyKind::random, "random"},
    {StrategyKind::snapshot_entropy, "snapshot_entropy"},
    {StrategyKind::snapshot_margin, "snapshot_margin"},
    {StrategyKind::coreset, "coreset"},
    {StrategyKind::tidal_entropy, "tidal_entropy"},
    {StrategyKind::tidal_margin, "tidal_margin"},
    {StrategyKind::tidal_margin_naive, "tidal_margin_naive"},
    {StrategyKind::tidal_prob, "tidal_prob"},
    {StrategyKind::tidal_prob_naive, "tidal_prob_naive"},
}};

double max_excluding(const ProbVector& p, std::size_t skip) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (c != skip) best = std::max(best, p[c]);
  }
  return best;
}

}  // namespace

std::string to_string(StrategyKind k) {
  for (const auto& [kind, name] : kNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

StrategyKind strategy_from_string(const std::string& s) {
  for (const auto& [kind, name] : kNames) {
    if (s == name) return kind;
  }
  throw InputError("unknown strategy '" + s + "'");
}

std::vector<StrategyKind> all_strategies() {
  std::vector<StrategyKind> out;
  for (const auto& entry : kNames) out.push_back(entry.first);
  return out;
}

bool uses_td_head(StrategyKind k) {
  switch (k) {
    case StrategyKind::tidal_entropy:
    case StrategyKind::tidal_margin:
    case StrategyKind::tidal_margin_naive:
    case StrategyKind::tidal_prob:
    case StrategyKind::tidal_prob_naive:
      return true;
    default:
      return false;
  }
}

Direction direction_of(StrategyKind k) {
  switch (k) {
    case StrategyKind::snapshot_entropy:
    case StrategyKind::tidal_entropy:
      return Direction::higher_is_uncertain;
    case StrategyKind::snapshot_margin:
    case StrategyKind::tidal_margin:
    case StrategyKind::tidal_margin_naive:
    case StrategyKind::tidal_prob:
    case StrategyKind::tidal_prob_naive:
      return Direction::lower_is_uncertain;
    default:
      throw InputError("strategy '" + to_string(k) + "' does not produce scores");
  }
}

double entropy(const ProbVector& p) {
  double h = 0.0;
  for (double v : p.values()) {
    if (v > 0.0) h -= v * std::log(std::max(v, kProbFloor));
  }
  return h;
}

double margin_with_label(const ProbVector& p, std::size_t y) {
  if (y >= p.size()) throw InputError("margin: class index out of range");
  if (p.size() < 2) throw InputError("margin: need at least 2 classes");
  return p[y] - max_excluding(p, y);
}

double tidal_margin(const ProbVector& p_cls, const ProbVector& p_score) {
  if (p_cls.size() != p_score.size()) throw InputError("tidal_margin: dimension mismatch");
  return margin_with_label(p_score, p_cls.argmax());
}

double margin_naive(const ProbVector& p_mod) { return margin_with_label(p_mod, p_mod.argmax()); }

double prob_at_predicted(const ProbVector& p_cls, const ProbVector& p_mod) {
  if (p_cls.size() != p_mod.size()) throw InputError("prob_at_predicted: dimension mismatch");
  return p_mod[p_cls.argmax()];
}

double prob_max(const ProbVector& p_mod) { return p_mod[p_mod.argmax()]; }

double score(StrategyKind k, const ProbVector& p_cls, const ProbVector& p_mod) {
  switch (k) {
    case StrategyKind::snapshot_entropy: return entropy(p_cls);
    case StrategyKind::snapshot_margin: return tidal_margin(p_cls, p_cls);
    case StrategyKind::tidal_entropy: return entropy(p_mod);
    case StrategyKind::tidal_margin: return tidal_margin(p_cls, p_mod);
    case StrategyKind::tidal_margin_naive: return margin_naive(p_mod);
    case StrategyKind::tidal_prob: return prob_at_predicted(p_cls, p_mod);
    case StrategyKind::tidal_prob_naive: return prob_max(p_mod);
    default:
      throw InputError("strategy '" + to_string(k) + "' does not produce scores");
  }
}

}  // namespace tidal::est
