#include "tidal/tdtrack.hpp"

#include <string>

#include "tidal/csv.hpp"
#include "tidal/errors.hpp"

namespace tidal::td {

TdRecord::TdRecord(std::size_t n_classes) : mean_(n_classes, 0.0) {
  if (n_classes < 2) throw InputError("td: need at least 2 classes");
}

void TdRecord::update(const ProbVector& p) {
  if (p.size() != mean_.size()) {
    throw InputError("td_update: expected " + std::to_string(mean_.size()) + " classes, got " +
                     std::to_string(p.size()));
  }
  const double t = static_cast<double>(count_);
  for (std::size_t c = 0; c < mean_.size(); ++c) mean_[c] = (mean_[c] * t + p[c]) / (t + 1.0);
  ++count_;
}

ProbVector TdRecord::value() const {
  if (count_ == 0) throw StateError("td_value: record has no updates");
  return ProbVector::from(mean_);
}

TdRecord td_init(std::size_t n_classes) { return TdRecord(n_classes); }

TdRecord td_update(TdRecord rec, const ProbVector& p) {
  rec.update(p);
  return rec;
}

ProbVector td_value(const TdRecord& rec) { return rec.value(); }

TdStore::TdStore(std::size_t n_classes, bool keep_history)
    : n_classes_(n_classes), keep_history_(keep_history) {
  if (n_classes < 2) throw InputError("td store: need at least 2 classes");
}

void TdStore::update(SampleId id, const ProbVector& p) {
  auto it = records_.try_emplace(id, n_classes_).first;
  it->second.update(p);
  if (keep_history_) history_[id].push_back(p);
}

const TdRecord& TdStore::record(SampleId id) const {
  auto it = records_.find(id);
  if (it == records_.end()) throw StateError("td store: unknown sample " + std::to_string(id));
  return it->second;
}

const std::vector<ProbVector>& TdStore::history(SampleId id) const {
  if (!keep_history_) throw StateError("td store: history not retained");
  auto it = history_.find(id);
  if (it == history_.end()) throw StateError("td store: unknown sample " + std::to_string(id));
  return it->second;
}

void TdStore::write_csv(std::ostream& out) const {
  std::vector<std::string> header{"sample_id", "t"};
  for (std::size_t c = 0; c < n_classes_; ++c) header.push_back("p_" + std::to_string(c));
  csv::write_row(out, header);
  for (const auto& [id, rec] : records_) {
    out << id << ',' << rec.count();
    for (double v : rec.raw_mean()) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

}  // namespace tidal::td
