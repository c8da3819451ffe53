#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tidal/estimators.hpp"
#include "tidal/rng.hpp"

namespace tidal::acq {

using SampleId = std::int64_t;

/// Unlabeled ids, optionally with one feature row per id (CoreSet).
/// Never carries labels.
struct PoolView {
  std::vector<SampleId> ids;
  std::vector<std::vector<double>> features;  // empty, or parallel to ids
};

/// Uniform sample without replacement of min(size, |pool|) ids.
/// Throws StateError on an empty pool and InputError when size == 0.
PoolView sample_subset(const PoolView& pool, std::size_t size, Rng& rng);

/// The k most uncertain ids, most uncertain first; equal scores by ascending id.
std::vector<SampleId> select_top_k(std::span<const est::AcquisitionScore> scores, std::size_t k);

/// Greedy k-center: repeatedly take the unlabeled point farthest (Euclidean)
/// from everything covered so far; ties go to the lowest id. With no labeled
/// points the lowest-id unlabeled point is taken first.
std::vector<SampleId> kcenter_greedy(const std::vector<std::vector<double>>& labeled_feats,
                                     const PoolView& unlabeled, std::size_t k);

std::vector<SampleId> random_select(const PoolView& pool, std::size_t k, Rng& rng);

}  // namespace tidal::acq
