#include "tidal/acquisition.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "tidal/errors.hpp"

namespace tidal::acq {

PoolView sample_subset(const PoolView& pool, std::size_t size, Rng& rng) {
  if (pool.ids.empty()) throw StateError("sample_subset: empty pool");
  if (size == 0) throw InputError("sample_subset: size must be >= 1");
  const bool with_features = !pool.features.empty();
  if (with_features && pool.features.size() != pool.ids.size()) {
    throw InputError("sample_subset: features not parallel to ids");
  }
  std::vector<std::size_t> order(pool.ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(size, order.size()));

  PoolView out;
  out.ids.reserve(order.size());
  for (auto i : order) {
    out.ids.push_back(pool.ids[i]);
    if (with_features) out.features.push_back(pool.features[i]);
  }
  return out;
}

std::vector<SampleId> select_top_k(std::span<const est::AcquisitionScore> scores, std::size_t k) {
  if (k == 0) throw InputError("select_top_k: k must be >= 1");
  if (scores.empty()) return {};
  const auto dir = scores.front().direction;
  for (const auto& s : scores) {
    if (s.direction != dir) throw InputError("select_top_k: mixed score directions");
  }
  if (k > scores.size()) {
    warn("select_top_k: k=" + std::to_string(k) + " exceeds " + std::to_string(scores.size()) +
         " candidates; returning all");
    k = scores.size();
  }
  std::vector<est::AcquisitionScore> sorted(scores.begin(), scores.end());
  const bool higher = dir == est::Direction::higher_is_uncertain;
  auto more_uncertain = [higher](const est::AcquisitionScore& a, const est::AcquisitionScore& b) {
    if (a.score != b.score) return higher ? a.score > b.score : a.score < b.score;
    return a.sample_id < b.sample_id;
  };
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end(),
                    more_uncertain);
  std::vector<SampleId> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(sorted[i].sample_id);
  return out;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

std::vector<SampleId> kcenter_greedy(const std::vector<std::vector<double>>& labeled_feats,
                                     const PoolView& unlabeled, std::size_t k) {
  if (k == 0) throw InputError("kcenter_greedy: k must be >= 1");
  const std::size_t n = unlabeled.ids.size();
  if (unlabeled.features.size() != n) throw InputError("kcenter_greedy: features required for every id");
  if (n == 0) return {};
  const std::size_t dim = unlabeled.features.front().size();
  for (const auto& f : unlabeled.features) {
    if (f.size() != dim) throw InputError("kcenter_greedy: ragged unlabeled features");
  }
  for (const auto& f : labeled_feats) {
    if (f.size() != dim) throw InputError("kcenter_greedy: labeled/unlabeled dimension mismatch");
  }
  k = std::min(k, n);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> nearest(n, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& l : labeled_feats) nearest[i] = std::min(nearest[i], sq_dist(unlabeled.features[i], l));
  }
  std::vector<bool> taken(n, false);
  std::vector<SampleId> out;
  out.reserve(k);
  while (out.size() < k) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      if (best == n || nearest[i] > nearest[best] ||
          (nearest[i] == nearest[best] && unlabeled.ids[i] < unlabeled.ids[best])) {
        best = i;
      }
    }
    taken[best] = true;
    out.push_back(unlabeled.ids[best]);
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i]) nearest[i] = std::min(nearest[i], sq_dist(unlabeled.features[i], unlabeled.features[best]));
    }
  }
  return out;
}

std::vector<SampleId> random_select(const PoolView& pool, std::size_t k, Rng& rng) {
  return sample_subset(pool, k, rng).ids;
}

}  // namespace tidal::acq
