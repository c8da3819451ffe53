#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <vector>

#include "tidal/prob.hpp"

namespace tidal::td {

using SampleId = std::int64_t;

/// Running average of the probability vectors recorded for one sample.
/// After t updates, `mean` equals (p_1 + ... + p_t) / t.
class TdRecord {
 public:
  explicit TdRecord(std::size_t n_classes);

  std::size_t n_classes() const noexcept { return mean_.size(); }
  std::uint64_t count() const noexcept { return count_; }
  std::span<const double> raw_mean() const noexcept { return mean_; }

  void update(const ProbVector& p);
  /// Throws StateError when count() == 0.
  ProbVector value() const;

 private:
  std::vector<double> mean_;
  std::uint64_t count_ = 0;
};

TdRecord td_init(std::size_t n_classes);
TdRecord td_update(TdRecord rec, const ProbVector& p);
ProbVector td_value(const TdRecord& rec);

/// Training dynamics of every tracked sample in one run. Optionally keeps the
/// full per-update history for analysis.
class TdStore {
 public:
  explicit TdStore(std::size_t n_classes, bool keep_history = false);

  std::size_t n_classes() const noexcept { return n_classes_; }
  bool keeps_history() const noexcept { return keep_history_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool contains(SampleId id) const { return records_.count(id) != 0; }

  void update(SampleId id, const ProbVector& p);
  const TdRecord& record(SampleId id) const;
  ProbVector value(SampleId id) const { return record(id).value(); }
  /// Throws StateError unless the store keeps history.
  const std::vector<ProbVector>& history(SampleId id) const;

  const std::map<SampleId, TdRecord>& records() const noexcept { return records_; }

  /// CSV: sample_id,t,p_0,...,p_{C-1}
  void write_csv(std::ostream& out) const;

 private:
  std::size_t n_classes_;
  bool keep_history_;
  std::map<SampleId, TdRecord> records_;
  std::map<SampleId, std::vector<ProbVector>> history_;
};

}  // namespace tidal::td
