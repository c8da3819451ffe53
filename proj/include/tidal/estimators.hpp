#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tidal/prob.hpp"

namespace tidal::est {

enum class StrategyKind {
  random,
  snapshot_entropy,
  snapshot_margin,
  coreset,
  tidal_entropy,
  tidal_margin,
  tidal_margin_naive,
  tidal_prob,
  tidal_prob_naive,
};

std::string to_string(StrategyKind k);
/// Throws InputError for unknown names.
StrategyKind strategy_from_string(const std::string& s);
std::vector<StrategyKind> all_strategies();

/// Strategies that score with the TD head's output.
bool uses_td_head(StrategyKind k);

enum class Direction { higher_is_uncertain, lower_is_uncertain };

/// Entropy: higher is uncertain. Margin and probability scores: lower is uncertain.
/// Throws InputError for random and coreset, which do not produce scores.
Direction direction_of(StrategyKind k);

struct AcquisitionScore {
  std::int64_t sample_id = 0;
  double score = 0.0;
  Direction direction = Direction::higher_is_uncertain;
};

/// Shannon entropy in nats, -sum p log p with the log argument floored.
double entropy(const ProbVector& p);

/// p[y] - max_{c != y} p[c].
double margin_with_label(const ProbVector& p, std::size_t y);

/// Margin of `p_score` around the classifier's predicted label argmax(p_cls).
/// With p_score == p_cls this is the snapshot margin on unlabeled data.
double tidal_margin(const ProbVector& p_cls, const ProbVector& p_score);

/// Gap between the two largest entries of the module output.
double margin_naive(const ProbVector& p_mod);

/// Module output at the classifier's predicted label.
double prob_at_predicted(const ProbVector& p_cls, const ProbVector& p_mod);

/// Largest module output.
double prob_max(const ProbVector& p_mod);

/// Score one unlabeled sample. `p_cls` is the classifier snapshot, `p_mod` the
/// head's predicted TD. Throws InputError for random and coreset.
double score(StrategyKind k, const ProbVector& p_cls, const ProbVector& p_mod);

}  // namespace tidal::est
