#include "tidal/alengine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include "tidal/csv.hpp"
#include "tidal/errors.hpp"
#include "tidal/joint.hpp"
#include "tidal/rng.hpp"

namespace tidal::al {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string to_string(RecordMode m) { return m == RecordMode::training_pass ? "training_pass" : "epoch_end"; }

RecordMode record_mode_from_string(const std::string& s) {
  if (s == "training_pass") return RecordMode::training_pass;
  if (s == "epoch_end") return RecordMode::epoch_end;
  throw InputError("unknown record mode '" + s + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InputError("train: epochs must be >= 1");
  if (batch_size == 0) throw InputError("train: batch_size must be >= 1");
  if (!(lambda >= 0.0)) throw InputError("train: lambda must be >= 0");
  if (head_dim == 0) throw InputError("train: head_dim must be >= 1");
  optimizer.validate();
}

net::NetConfig NetShape::for_data(std::size_t input_dim, std::size_t n_classes, std::uint64_t seed) const {
  net::NetConfig cfg;
  cfg.input_dim = input_dim;
  cfg.hidden_sizes = hidden_sizes;
  cfg.n_classes = n_classes;
  cfg.tap_layers = tap_layers;
  cfg.activation = activation;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

void ALConfig::validate() const {
  if (initial_labeled == 0) throw InputError("al: initial_labeled must be >= 1");
  if (budget == 0) throw InputError("al: budget must be >= 1");
  if (n_cycles == 0) throw InputError("al: cycles must be >= 1");
  if (subset_size < budget) throw InputError("al: subset_size must be >= budget");
  train.validate();
}

std::uint64_t cycle_seed(std::uint64_t seed, std::size_t cycle) { return derive_seed(seed, cycle); }

namespace {

head::HeadConfig head_config_for(const net::Mlp& net, std::size_t head_dim) {
  head::HeadConfig hc;
  hc.reduced_dim = head_dim;
  hc.tap_dims = net.tap_dims();
  hc.n_classes = net.config().n_classes;
  return hc;
}

net::ForwardTrace forward_checked(const net::Mlp& net, const data::Sample& s) {
  try {
    return net.forward(s.features);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " (sample " + std::to_string(s.id) + ")", s.id);
  }
}

}  // namespace

TrainedModel train_model(std::span<const data::Sample* const> samples, const net::NetConfig& net_cfg,
                         const TrainConfig& cfg, std::uint64_t seed,
                         const data::Dataset* analysis_test) {
  cfg.validate();
  if (samples.empty()) throw StateError("train_model: no training samples");

  net::Mlp net(net_cfg);
  net.initialize(derive_seed(seed, "net"));
  head::TdHead head(head_config_for(net, cfg.head_dim));
  head.initialize(derive_seed(seed, "head"));
  net::OptimizerState net_opt(net.parameter_count());
  net::OptimizerState head_opt(head.parameter_count());
  TrainedModel model{std::move(net), std::move(head), td::TdStore(net_cfg.n_classes), {}, {}};

  Rng shuffle_rng(derive_seed(seed, "shuffle"));
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      net::Batch batch;
      std::vector<net::ForwardTrace> traces;
      std::vector<std::optional<ProbVector>> targets;
      for (std::size_t i = start; i < end; ++i) {
        const auto& s = *samples[order[i]];
        batch.ids.push_back(s.id);
        batch.features.emplace_back(s.features);
        batch.labels.push_back(s.label);
        traces.push_back(forward_checked(model.net, s));
        if (cfg.record == RecordMode::training_pass) model.td.update(s.id, traces.back().probs);
        targets.push_back(model.td.contains(s.id) ? std::optional(model.td.value(s.id)) : std::nullopt);
      }
      auto grads = net::joint_backward(model.net, model.head, batch, traces, targets, cfg.lambda, cfg.detach);
      loss_sum += grads.loss_total * static_cast<double>(batch.size());
      net::optimizer_step(model.net.parameters(), grads.net, net_opt, cfg.optimizer, epoch);
      net::optimizer_step(model.head.parameters(), grads.head, head_opt, cfg.optimizer, epoch);
    }
    model.epoch_losses.push_back(loss_sum / static_cast<double>(samples.size()));

    if (cfg.record == RecordMode::epoch_end) {
      for (const auto* s : samples) model.td.update(s->id, forward_checked(model.net, *s).probs);
    }
    if (analysis_test) {
      auto& snap = model.history.snapshot.emplace_back();
      auto& mod = model.history.module.emplace_back();
      for (const auto& s : analysis_test->samples) {
        auto tr = forward_checked(model.net, s);
        mod.push_back(model.head.forward(tr.taps).probs);
        snap.push_back(std::move(tr.probs));
      }
    }
  }
  return model;
}

EvalResult evaluate(const net::Mlp& net, const data::Dataset& test,
                    const std::vector<std::size_t>& minor_classes) {
  const std::size_t C = net.config().n_classes;
  std::vector<std::size_t> hits(C, 0), totals(C, 0);
  std::size_t correct = 0;
  for (const auto& s : test.samples) {
    if (s.label >= C) throw InputError("evaluate: label out of range");
    const bool ok = net.forward(s.features).probs.argmax() == s.label;
    correct += ok;
    hits[s.label] += ok;
    ++totals[s.label];
  }
  EvalResult r;
  r.accuracy = test.samples.empty() ? kNaN : static_cast<double>(correct) / static_cast<double>(test.samples.size());
  r.per_class.resize(C);
  for (std::size_t c = 0; c < C; ++c) {
    r.per_class[c] = totals[c] ? static_cast<double>(hits[c]) / static_cast<double>(totals[c]) : kNaN;
  }
  if (minor_classes.empty()) {
    r.minor_accuracy = kNaN;
  } else {
    double sum = 0.0;
    for (auto c : minor_classes) sum += r.per_class.at(c);
    r.minor_accuracy = sum / static_cast<double>(minor_classes.size());
  }
  return r;
}

std::vector<KlRow> kl_analysis(const SnapshotHistory& history) {
  if (history.empty()) throw StateError("kl_analysis: analysis mode was not enabled");
  const std::size_t T = history.snapshot.size();
  const std::size_t n = history.snapshot.front().size();
  if (n == 0) throw StateError("kl_analysis: empty test set");

  std::vector<ProbVector> final_td;
  final_td.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    td::TdRecord rec(history.snapshot.front()[i].size());
    for (std::size_t t = 0; t < T; ++t) rec.update(history.snapshot[t][i]);
    final_td.push_back(rec.value());
  }
  std::vector<KlRow> rows;
  for (std::size_t t = 0; t < T; ++t) {
    KlRow row;
    row.epoch = static_cast<int>(t + 1);
    for (std::size_t i = 0; i < n; ++i) {
      row.kl_module += head::kl_divergence(final_td[i], history.module[t][i]);
      row.kl_snapshot += head::kl_divergence(final_td[i], history.snapshot[t][i]);
    }
    row.kl_module /= static_cast<double>(n);
    row.kl_snapshot /= static_cast<double>(n);
    rows.push_back(row);
  }
  return rows;
}

double separation_auroc(std::span<const double> scores, const std::vector<bool>& is_minor) {
  if (scores.size() != is_minor.size()) throw InputError("separation_auroc: size mismatch");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney U with mid-ranks for ties
  double rank_sum_minor = 0.0;
  std::size_t n_minor = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (is_minor[idx[k]]) {
        rank_sum_minor += mid_rank;
        ++n_minor;
      }
    }
    i = j;
  }
  const std::size_t n_major = scores.size() - n_minor;
  if (n_minor == 0 || n_major == 0) throw StateError("separation_auroc: need both minor and major samples");
  const double nm = static_cast<double>(n_minor);
  const double u = rank_sum_minor - nm * (nm + 1.0) / 2.0;
  return u / (nm * static_cast<double>(n_major));
}

void write_score_csv(const std::vector<ScoreRow>& rows, std::ostream& out) {
  csv::write_row(out, {"sample_id", "strategy", "score", "predicted_label", "selected"});
  for (const auto& r : rows) {
    out << r.sample_id << ',' << r.strategy << ',' << csv::format_double(r.score) << ','
        << r.predicted_label << ',' << (r.selected ? 1 : 0) << '\n';
  }
}

void write_kl_csv(const std::vector<KlRow>& rows, std::ostream& out) {
  csv::write_row(out, {"epoch", "kl_module", "kl_snapshot"});
  for (const auto& r : rows) {
    out << r.epoch << ',' << csv::format_double(r.kl_module) << ',' << csv::format_double(r.kl_snapshot) << '\n';
  }
}

PoolScores score_pool(const net::Mlp& net, const head::TdHead& head, est::StrategyKind strategy,
                      const acq::PoolView& subset) {
  if (subset.features.size() != subset.ids.size()) throw InputError("score_pool: features required");
  PoolScores out;
  const bool scored = strategy != est::StrategyKind::random && strategy != est::StrategyKind::coreset;
  for (std::size_t i = 0; i < subset.ids.size(); ++i) {
    auto tr = net.forward(subset.features[i]);
    out.predicted.push_back(tr.probs.argmax());
    if (strategy == est::StrategyKind::coreset) out.embeddings.push_back(tr.act.back());
    if (!scored) continue;
    const ProbVector p_mod = est::uses_td_head(strategy) ? head.forward(tr.taps).probs : tr.probs;
    out.scores.push_back({subset.ids[i], est::score(strategy, tr.probs, p_mod), est::direction_of(strategy)});
  }
  return out;
}

LabelState initial_state(const data::Dataset& train, std::size_t k0, std::uint64_t seed) {
  if (train.samples.empty()) throw StateError("initial_state: empty training split");
  acq::PoolView all;
  for (const auto& s : train.samples) all.ids.push_back(s.id);
  Rng rng(derive_seed(seed, "initial"));
  LabelState st;
  st.labeled = acq::random_select(all, k0, rng);
  std::set<SampleId> chosen(st.labeled.begin(), st.labeled.end());
  for (auto id : all.ids) {
    if (!chosen.count(id)) st.pool.push_back(id);
  }
  return st;
}

CycleReport run_cycle(const ALConfig& cfg, const data::Prepared& data, LabelState& state,
                      std::size_t cycle, bool select, bool analysis) {
  const auto t0 = std::chrono::steady_clock::now();
  if (state.labeled.empty()) throw StateError("run_cycle: labeled set is empty");

  std::unordered_map<SampleId, const data::Sample*> by_id;
  for (const auto& s : data.train.samples) by_id.emplace(s.id, &s);
  auto lookup = [&](SampleId id) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw StateError("run_cycle: unknown sample id " + std::to_string(id));
    return it->second;
  };

  std::vector<const data::Sample*> labeled;
  for (auto id : state.labeled) labeled.push_back(lookup(id));

  const std::uint64_t seed = cycle_seed(cfg.seed, cycle);
  const auto net_cfg = cfg.net.for_data(data.train.dim, data.train.n_classes, seed);
  auto model = train_model(labeled, net_cfg, cfg.train, seed, analysis ? &data.test : nullptr);

  CycleReport rep;
  rep.cycle = cycle;
  rep.labeled_count = state.labeled.size();
  const auto ev = evaluate(model.net, data.test, data.minor_classes);
  rep.test_accuracy = ev.accuracy;
  rep.minor_class_accuracy = ev.minor_accuracy;
  rep.per_class_accuracy = ev.per_class;
  if (analysis) rep.kl_rows = kl_analysis(model.history);
  if (cfg.train.lambda == 0.0 && est::uses_td_head(cfg.strategy)) {
    rep.notes.push_back("ablation: lambda = 0, TD head scores come from a head without KL training");
  }

  if (select && !state.pool.empty()) {
    // the pool view carries features only; labels never reach the scorer
    acq::PoolView pool;
    for (auto id : state.pool) {
      pool.ids.push_back(id);
      pool.features.push_back(lookup(id)->features);
    }
    Rng subset_rng(derive_seed(seed, "subset"));
    const auto subset = acq::sample_subset(pool, cfg.subset_size, subset_rng);
    const std::size_t k = std::min(cfg.budget, subset.ids.size());
    auto scored = score_pool(model.net, model.head, cfg.strategy, subset);

    switch (cfg.strategy) {
      case est::StrategyKind::random: {
        Rng pick_rng(derive_seed(seed, "random_select"));
        rep.selected = acq::random_select(subset, k, pick_rng);
        break;
      }
      case est::StrategyKind::coreset: {
        std::vector<std::vector<double>> labeled_emb;
        for (const auto* s : labeled) labeled_emb.push_back(model.net.forward(s->features).act.back());
        acq::PoolView emb{subset.ids, scored.embeddings};
        rep.selected = acq::kcenter_greedy(labeled_emb, emb, k);
        break;
      }
      default:
        rep.selected = acq::select_top_k(scored.scores, k);
    }

    const std::set<SampleId> chosen(rep.selected.begin(), rep.selected.end());
    const std::string name = est::to_string(cfg.strategy);
    for (std::size_t i = 0; i < subset.ids.size(); ++i) {
      const double sc = scored.scores.empty() ? kNaN : scored.scores[i].score;
      rep.scores.push_back({subset.ids[i], name, sc, scored.predicted[i], chosen.count(subset.ids[i]) > 0});
    }
    std::vector<SampleId> remaining;
    for (auto id : state.pool) {
      if (!chosen.count(id)) remaining.push_back(id);
    }
    state.pool = std::move(remaining);
    state.labeled.insert(state.labeled.end(), rep.selected.begin(), rep.selected.end());
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::vector<CycleReport> run_experiment(const ALConfig& cfg, const data::Prepared& data, bool analysis,
                                        const std::function<void(const CycleReport&)>& on_cycle) {
  cfg.validate();
  if (cfg.initial_labeled < data.train.n_classes) {
    warn("al: initial_labeled (" + std::to_string(cfg.initial_labeled) + ") is below the class count");
  }
  LabelState state = initial_state(data.train, cfg.initial_labeled, cfg.seed);
  std::vector<CycleReport> reports;
  for (std::size_t c = 0; c <= cfg.n_cycles; ++c) {
    const bool select = c < cfg.n_cycles;
    auto rep = run_cycle(cfg, data, state, c, select, analysis);
    const bool exhausted = select && rep.selected.empty();
    if (on_cycle) on_cycle(rep);
    if (c > 0) reports.push_back(std::move(rep));
    if (exhausted) {
      warn("al: unlabeled pool exhausted after cycle " + std::to_string(c));
      break;
    }
  }
  return reports;
}

PilotResult run_pilot(const data::Prepared& data, const NetShape& shape, const TrainConfig& cfg,
                      std::uint64_t seed, bool analysis) {
  if (data.minor_classes.empty()) throw StateError("pilot: dataset has no minor classes");
  std::vector<const data::Sample*> samples;
  for (const auto& s : data.train.samples) samples.push_back(&s);
  const auto net_cfg = shape.for_data(data.train.dim, data.train.n_classes, seed);
  auto model = train_model(samples, net_cfg, cfg, seed, analysis ? &data.test : nullptr);

  const std::set<std::size_t> minor(data.minor_classes.begin(), data.minor_classes.end());
  const std::vector<std::string> names{"snapshot_entropy", "snapshot_margin", "td_entropy",
                                       "td_margin",        "tidal_entropy",   "tidal_margin"};
  std::vector<std::vector<double>> uncertainty(names.size());
  std::vector<bool> is_minor;
  PilotResult out{{}, {}, model.td, {}};

  for (const auto* s : samples) {
    auto tr = model.net.forward(s->features);
    const auto p_mod = model.head.forward(tr.taps).probs;
    const auto p_td = model.td.value(s->id);
    const std::size_t pred = tr.probs.argmax();
    const double vals[] = {
        est::entropy(tr.probs),
        est::margin_with_label(tr.probs, s->label),
        est::entropy(p_td),
        est::margin_with_label(p_td, s->label),
        est::entropy(p_mod),
        est::tidal_margin(tr.probs, p_mod),
    };
    for (std::size_t e = 0; e < names.size(); ++e) {
      out.scores.push_back({s->id, names[e], vals[e], pred, false});
      // margins are low-is-uncertain; flip so higher means more uncertain
      const bool is_margin = names[e].find("margin") != std::string::npos;
      uncertainty[e].push_back(is_margin ? -vals[e] : vals[e]);
    }
    is_minor.push_back(minor.count(s->label) > 0);
  }
  for (std::size_t e = 0; e < names.size(); ++e) {
    out.auroc.emplace_back(names[e], separation_auroc(uncertainty[e], is_minor));
  }
  if (analysis) out.kl_rows = kl_analysis(model.history);
  return out;
}

}  // namespace tidal::al
