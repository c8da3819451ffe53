#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tidal/acquisition.hpp"
#include "tidal/datasets.hpp"
#include "tidal/estimators.hpp"
#include "tidal/netcore.hpp"
#include "tidal/tdhead.hpp"
#include "tidal/tdtrack.hpp"

namespace tidal::al {

using SampleId = std::int64_t;

/// When the per-epoch probability of a training sample is recorded.
enum class RecordMode {
  training_pass,  // from the batch forward pass, before that batch's update
  epoch_end,      // from an evaluation pass after the epoch
};

std::string to_string(RecordMode m);
RecordMode record_mode_from_string(const std::string& s);

struct TrainConfig {
  int epochs = 60;
  std::size_t batch_size = 32;
  double lambda = 1.0;
  bool detach = false;
  RecordMode record = RecordMode::training_pass;
  std::size_t head_dim = 16;
  net::OptimizerConfig optimizer;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Network shape for a run; input_dim and n_classes come from the data.
struct NetShape {
  std::vector<std::size_t> hidden_sizes{64, 32};
  std::vector<std::size_t> tap_layers{0, 1};
  net::Activation activation = net::Activation::relu;

  net::NetConfig for_data(std::size_t input_dim, std::size_t n_classes, std::uint64_t seed) const;
  friend bool operator==(const NetShape&, const NetShape&) = default;
};

struct ALConfig {
  std::size_t initial_labeled = 20;
  std::size_t budget = 20;
  std::size_t n_cycles = 5;
  std::size_t subset_size = 200;
  est::StrategyKind strategy = est::StrategyKind::tidal_entropy;
  NetShape net;
  TrainConfig train;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const ALConfig&, const ALConfig&) = default;
};

struct KlRow {
  int epoch = 0;  // 1-based
  double kl_module = 0.0;
  double kl_snapshot = 0.0;
};

/// Per-epoch test-set predictions kept in analysis mode.
struct SnapshotHistory {
  std::vector<std::vector<ProbVector>> snapshot;  // [epoch][test sample] classifier p^(t)
  std::vector<std::vector<ProbVector>> module;    // [epoch][test sample] head output
  bool empty() const noexcept { return snapshot.empty(); }
};

struct TrainedModel {
  net::Mlp net;
  head::TdHead head;
  td::TdStore td;
  std::vector<double> epoch_losses;  // mean joint loss per epoch
  SnapshotHistory history;           // filled only in analysis mode
};

/// From-scratch joint training of classifier + TD head on `samples`. All
/// randomness derives from `seed`. With `analysis_test`, every epoch ends with
/// a test-set pass recorded in `history`.
TrainedModel train_model(std::span<const data::Sample* const> samples, const net::NetConfig& net_cfg,
                         const TrainConfig& cfg, std::uint64_t seed,
                         const data::Dataset* analysis_test = nullptr);

struct EvalResult {
  double accuracy = 0.0;
  std::vector<double> per_class;  // recall per class; NaN for classes absent from the test set
  /// Mean recall over `minor_classes`; NaN when none were given.
  double minor_accuracy = 0.0;
};

EvalResult evaluate(const net::Mlp& net, const data::Dataset& test,
                    const std::vector<std::size_t>& minor_classes = {});

/// Rows (t, mean KL(pbar^(T) || module^(t)), mean KL(pbar^(T) || p^(t))) where
/// pbar^(T) is the average of all recorded test snapshots.
/// Throws StateError when the history is empty (analysis mode off).
std::vector<KlRow> kl_analysis(const SnapshotHistory& history);

/// Probability that a random minor sample scores above a random major one;
/// ties count one half. Throws StateError unless both groups are non-empty.
double separation_auroc(std::span<const double> scores, const std::vector<bool>& is_minor);

struct ScoreRow {
  SampleId sample_id = 0;
  std::string strategy;
  double score = 0.0;
  std::size_t predicted_label = 0;
  bool selected = false;
};

/// CSV: sample_id,strategy,score,predicted_label,selected
void write_score_csv(const std::vector<ScoreRow>& rows, std::ostream& out);
/// CSV: epoch,kl_module,kl_snapshot
void write_kl_csv(const std::vector<KlRow>& rows, std::ostream& out);

/// Score an unlabeled subset. Receives features only, never labels.
/// Returns one score per id (empty for random/coreset) and the classifier's predicted labels.
struct PoolScores {
  std::vector<est::AcquisitionScore> scores;
  std::vector<std::size_t> predicted;
  std::vector<std::vector<double>> embeddings;  // last hidden layer, for coreset
};
PoolScores score_pool(const net::Mlp& net, const head::TdHead& head, est::StrategyKind strategy,
                      const acq::PoolView& subset);

struct CycleReport {
  std::size_t cycle = 0;
  std::size_t labeled_count = 0;
  double test_accuracy = 0.0;
  double minor_class_accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  std::vector<SampleId> selected;
  double wall_seconds = 0.0;
  std::vector<KlRow> kl_rows;
  std::vector<ScoreRow> scores;
  std::vector<std::string> notes;
};

/// Labeled/pool partition of the training split.
struct LabelState {
  std::vector<SampleId> labeled;
  std::vector<SampleId> pool;
};

/// Random initial labeled set of size k0 drawn from the training split.
LabelState initial_state(const data::Dataset& train, std::size_t k0, std::uint64_t seed);

/// Train from scratch on the current labeled set with the cycle seed, evaluate,
/// and (if `select`) score a random pool subset and move the chosen ids into
/// the labeled set.
CycleReport run_cycle(const ALConfig& cfg, const data::Prepared& data, LabelState& state,
                      std::size_t cycle, bool select, bool analysis = false);

/// Cycle 0 trains on the initial k0 and selects; cycles 1..n_cycles each train,
/// evaluate and report, selecting for the next cycle. Returns n_cycles reports
/// (fewer if the pool runs out). `on_cycle`, when set, sees every cycle's
/// report including cycle 0.
std::vector<CycleReport> run_experiment(const ALConfig& cfg, const data::Prepared& data,
                                        bool analysis = false,
                                        const std::function<void(const CycleReport&)>& on_cycle = {});

/// Seed used for the from-scratch initialization of cycle `cycle`.
std::uint64_t cycle_seed(std::uint64_t seed, std::size_t cycle);

struct PilotResult {
  std::vector<ScoreRow> scores;  // one row per training sample per estimator
  std::vector<std::pair<std::string, double>> auroc;  // estimator -> minor-vs-major AUROC
  td::TdStore td;
  std::vector<KlRow> kl_rows;  // only when run with analysis
};

/// Train on the whole (imbalanced) training split and compare how well snapshot
/// and TD scores of training samples separate minor from major classes.
/// Estimators: snapshot_entropy, snapshot_margin, td_entropy, td_margin,
/// tidal_entropy, tidal_margin (margins use the true label except tidal_margin).
PilotResult run_pilot(const data::Prepared& data, const NetShape& shape, const TrainConfig& cfg,
                      std::uint64_t seed, bool analysis = false);

}  // namespace tidal::al
