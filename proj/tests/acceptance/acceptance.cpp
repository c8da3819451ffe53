// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "support.hpp"
#include "tidal/acquisition.hpp"
#include "tidal/alengine.hpp"
#include "tidal/config.hpp"
#include "tidal/dispatch.hpp"
#include "tidal/errors.hpp"
#include "tidal/estimators.hpp"
#include "tidal/tdtrack.hpp"
#include "tidal/theorysim.hpp"

using namespace tidal;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances and budgets ----
constexpr double kGradRelTol = 1e-4;
constexpr double kGradFdStep = 1e-5;
constexpr int kGradInstances = 6;
constexpr double kGradSeconds = 10;

constexpr double kClosedFormTol = 1e-12;
constexpr double kClosedFormSeconds = 1;

constexpr double kSlopeTol = 1e-6;
constexpr double kDiscreteRelTol = 0.05;
constexpr std::size_t kDiscreteRuns = 200;
constexpr double kTheorySeconds = 30;

constexpr int kPilotSeeds = 5;
constexpr int kPilotEpochs = 30;
constexpr double kPilotSeconds = 300;
constexpr int kKlMinSeeds = 4;
constexpr double kKlSeconds = 300;

constexpr int kAlSeeds = 10;
constexpr double kAlMargin = 0.02;
constexpr double kAlSeconds = 900;

constexpr double kOracleTol = 1e-12;
constexpr double kOracleSeconds = 30;
constexpr double kDeterminismSeconds = 120;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---- 1 ----
Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Shape {
    std::size_t in;
    std::vector<std::size_t> hidden;
    std::vector<std::size_t> taps;
    std::size_t classes;
    net::Activation act;
  };
  const std::vector<Shape> shapes{
      {2, {3}, {0}, 2, net::Activation::relu},       {4, {6, 5}, {0, 1}, 3, net::Activation::relu},
      {3, {5, 4}, {1}, 4, net::Activation::tanh},    {5, {4, 4, 3}, {0, 2}, 3, net::Activation::tanh},
      {6, {8, 6}, {0, 1}, 5, net::Activation::relu}, {2, {4, 3}, {0, 1}, 2, net::Activation::tanh},
  };
  double worst = 0;
  std::size_t checked = 0;
  for (int i = 0; i < kGradInstances; ++i) {
    const auto& s = shapes[static_cast<std::size_t>(i)];
    net::NetConfig cfg;
    cfg.input_dim = s.in;
    cfg.hidden_sizes = s.hidden;
    cfg.tap_layers = s.taps;
    cfg.n_classes = s.classes;
    cfg.activation = s.act;
    const auto inst = testing_support::make_instance(1000 + static_cast<std::uint64_t>(i), cfg, 3, 4 + i % 3);
    for (double lambda : {0.0, 0.5, 1.0}) {
      const auto rep = testing_support::finite_difference_check(inst, lambda, kGradFdStep);
      worst = std::max(worst, rep.max_rel_error);
      checked += rep.checked;
    }
  }
  const double secs = seconds_since(t0);
  return {worst < kGradRelTol && secs < kGradSeconds,
          "max relative error " + fmt("%.3g", worst) + " over " + std::to_string(checked) +
              " parameter checks (limit 1e-4), " + fmt("%.2f", secs) + " s"};
}

// ---- 2 ----
Outcome closed_forms() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  double worst = 0;
  const std::vector<std::size_t> classes{2, 3, 10, 100};
  for (auto C : classes) {
    double prev_h = 0, prev_m = 0;
    for (int i = 0; i <= 8; ++i) {
      const double s = 0.55 + 0.05 * i;
      const double h = theory::theorem2_entropy(s, C);
      const double m = theory::theorem2_margin(s, C);
      const auto v = theory::uniform_other_vector(s, C);
      worst = std::max({worst, std::abs(h - est::entropy(v)), std::abs(m - est::margin_with_label(v, 0))});
      if (i > 0 && !(h < prev_h && m > prev_m)) ok = false;
      prev_h = h;
      prev_m = m;
    }
  }
  const double secs = seconds_since(t0);
  return {ok && worst <= kClosedFormTol && secs < kClosedFormSeconds,
          std::string(ok ? "monotone" : "NOT monotone") + " on 9x4 grid, max deviation from estimators " +
              fmt("%.3g", worst) + ", " + fmt("%.3f", secs) + " s"};
}

// ---- 3 ----
Outcome elasticity() {
  const auto t0 = std::chrono::steady_clock::now();
  theory::ElasticityParams p;
  p.n_1e = p.n_1h = p.n_2 = 30;
  p.alpha_e = 1.0;
  p.alpha_h = 0.5;
  p.beta = 0.1;
  p.x0 = {1.0, 1.0, 1.0};
  p.sigma = 0.0;
  p.h = 1e-3;
  p.steps = 1000;
  p.seed = 2024;
  p.validate();

  const auto ode = theory::integrate_ode(p, p.h, 5.0);
  const auto gap = theory::convergence_gap(ode);
  bool positive = true;
  for (std::size_t m = 1; m < gap.size(); ++m) positive = positive && gap[m] > 0.0;
  const double slope = (gap[1] - gap[0]) / ode.time_step;

  const auto disc = theory::simulate_discrete_mean(p, kDiscreteRuns);
  const double d_gap = theory::convergence_gap(disc).back();
  const double o_gap = gap[1000];
  const double rel = std::abs(d_gap - o_gap) / std::abs(o_gap);
  const double secs = seconds_since(t0);
  const bool ok = positive && std::abs(slope - 1.0 / 6.0) <= kSlopeTol && rel < kDiscreteRelTol && secs < kTheorySeconds;
  return {ok, std::string("gap ") + (positive ? "positive" : "NOT positive") + " on (0,5], initial slope " +
                  fmt("%.9f", slope) + ", gap at t=1 discrete " + fmt("%.5f", d_gap) + " vs ODE " +
                  fmt("%.5f", o_gap) + " (rel " + fmt("%.3f", rel) + ", limit 0.05), " + fmt("%.2f", secs) + " s"};
}

// ---- shared pilot setup ----
data::DatasetSpec pilot_spec(std::uint64_t seed) {
  data::DatasetSpec s;
  s.generator = data::Generator::gaussian_mixture;
  s.n_classes = 10;
  s.dim = 16;
  s.per_class = 200;
  s.radius = 3.0;
  s.noise = 1.0;
  s.imbalance = {10.0, data::ImbalanceProfile::step, {5, 6, 7, 8, 9}};
  s.test_fraction = 0.3;
  s.seed = derive_seed(7, seed);
  return s;
}

al::TrainConfig pilot_train() {
  al::TrainConfig t;
  t.epochs = kPilotEpochs;
  t.batch_size = 32;
  t.lambda = 1.0;
  t.optimizer.kind = net::OptimizerKind::adam;
  t.optimizer.initial_lr = 1e-3;
  t.optimizer.weight_decay = 5e-4;
  t.optimizer.decay_epoch = 24;
  t.optimizer.decay_factor = 0.1;
  return t;
}

struct PilotRuns {
  std::vector<al::PilotResult> results;
  double seconds = 0;
};

PilotRuns run_pilots() {
  const auto t0 = std::chrono::steady_clock::now();
  PilotRuns out;
  al::NetShape shape;  // 64-32 relu, taps on both hidden layers
  for (int s = 0; s < kPilotSeeds; ++s) {
    const auto data = data::prepare(pilot_spec(static_cast<std::uint64_t>(s)));
    out.results.push_back(al::run_pilot(data, shape, pilot_train(), static_cast<std::uint64_t>(s), true));
  }
  out.seconds = seconds_since(t0);
  return out;
}

// ---- 4 ----
Outcome pilot_separation(const PilotRuns& runs) {
  std::map<std::string, double> mean;
  for (const auto& r : runs.results)
    for (const auto& [name, auc] : r.auroc) mean[name] += auc / kPilotSeeds;
  const bool ok = mean["td_entropy"] > mean["snapshot_entropy"] && mean["td_margin"] > mean["snapshot_margin"] &&
                  runs.seconds < kPilotSeconds;
  return {ok, "mean AUROC entropy: TD " + fmt("%.4f", mean["td_entropy"]) + " vs snapshot " +
                  fmt("%.4f", mean["snapshot_entropy"]) + "; margin: TD " + fmt("%.4f", mean["td_margin"]) +
                  " vs snapshot " + fmt("%.4f", mean["snapshot_margin"]) + " (predicted-TD entropy " +
                  fmt("%.4f", mean["tidal_entropy"]) + ", margin " + fmt("%.4f", mean["tidal_margin"]) + "), " +
                  fmt("%.1f", runs.seconds) + " s"};
}

// ---- 5 ----
Outcome kl_convergence(const PilotRuns& runs) {
  int wins = 0;
  std::string per_seed;
  for (const auto& r : runs.results) {
    const auto& last = r.kl_rows.back();
    wins += last.kl_module < last.kl_snapshot;
    per_seed += " " + fmt("%.4f", last.kl_module) + "<" + fmt("%.4f", last.kl_snapshot) + "?";
  }
  const bool ok = wins >= kKlMinSeeds && runs.seconds < kKlSeconds;
  return {ok, std::to_string(wins) + "/" + std::to_string(kPilotSeeds) +
                  " seeds with module KL below snapshot KL at the final epoch (need 4); module vs snapshot:" +
                  per_seed};
}

// ---- 6 ----
data::DatasetSpec al_spec(std::uint64_t seed) {
  data::DatasetSpec s;
  s.n_classes = 8;
  s.dim = 16;
  s.per_class = 500;
  s.radius = 3.0;
  s.noise = 1.0;
  s.test_fraction = 0.3;
  s.seed = derive_seed(11, seed);
  return s;
}

Outcome al_band() {
  const auto t0 = std::chrono::steady_clock::now();
  double rand_mean = 0, tidal_mean = 0, oracle_mean = 0;
  int seeds_within = 0;
  for (int s = 0; s < kAlSeeds; ++s) {
    const auto spec = al_spec(static_cast<std::uint64_t>(s));
    const auto data = data::prepare(spec);
    const auto means = data::gaussian_mixture_means(spec);
    std::size_t hits = 0;
    for (const auto& x : data.test.samples) hits += oracle::nearest_mean(means, x.features) == x.label;
    const double oracle_acc = static_cast<double>(hits) / static_cast<double>(data.test.samples.size());

    double finals[2];
    int i = 0;
    for (auto strategy : {est::StrategyKind::random, est::StrategyKind::tidal_entropy}) {
      al::ALConfig cfg;
      cfg.initial_labeled = 20;
      cfg.budget = 20;
      cfg.subset_size = 200;
      cfg.n_cycles = 5;
      cfg.strategy = strategy;
      cfg.seed = static_cast<std::uint64_t>(s);
      finals[i++] = al::run_experiment(cfg, data).back().test_accuracy;
    }
    seeds_within += finals[0] <= oracle_acc;
    rand_mean += finals[0] / kAlSeeds;
    tidal_mean += finals[1] / kAlSeeds;
    oracle_mean += oracle_acc / kAlSeeds;
  }
  const double secs = seconds_since(t0);
  const bool a = rand_mean <= oracle_mean;
  const bool b = tidal_mean >= rand_mean - kAlMargin;
  return {a && b && secs < kAlSeconds,
          "(a) random " + fmt("%.4f", rand_mean) + " <= nearest-mean oracle " + fmt("%.4f", oracle_mean) + " [" +
              std::to_string(seeds_within) + "/10 seeds individually]; (b) tidal_entropy " + fmt("%.4f", tidal_mean) +
              " >= random - 0.02 = " + fmt("%.4f", rand_mean - kAlMargin) + "; " + fmt("%.1f", secs) + " s"};
}

// ---- 7 ----
Outcome oracle_equivalences() {
  const auto t0 = std::chrono::steady_clock::now();
  set_warnings_enabled(false);
  std::mt19937_64 rng(77);
  int topk_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 80;
    const bool higher = rng() % 2 == 0;
    std::vector<est::AcquisitionScore> scores;
    std::vector<std::pair<double, std::int64_t>> ref;
    std::set<std::int64_t> used;
    while (scores.size() < n) {
      const auto id = static_cast<std::int64_t>(rng() % 1000000);
      if (!used.insert(id).second) continue;
      const double v = trial % 3 == 0 ? static_cast<double>(rng() % 10) : std::uniform_real_distribution<double>()(rng);
      scores.push_back({id, v, higher ? est::Direction::higher_is_uncertain : est::Direction::lower_is_uncertain});
      ref.emplace_back(v, id);
    }
    const std::size_t k = 1 + rng() % (n + 5);
    topk_bad += acq::select_top_k(scores, k) != oracle::full_sort_top_k(ref, k, higher);
  }

  int kc_bad = 0, kc_instances = 0;
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial) % 8;
    const std::size_t dim = 1 + rng() % 3;
    std::vector<std::vector<double>> labeled(rng() % 4, std::vector<double>(dim));
    for (auto& l : labeled)
      for (double& v : l) v = trial % 2 ? std::round(u(rng)) : u(rng);
    acq::PoolView pool;
    for (std::size_t i = 0; i < n; ++i) {
      pool.ids.push_back(static_cast<std::int64_t>(rng() % 50) * 10 + static_cast<std::int64_t>(i));
      std::vector<double> f(dim);
      for (double& v : f) v = trial % 2 ? std::round(u(rng)) : u(rng);
      pool.features.push_back(f);
    }
    for (std::size_t k = 1; k <= n; ++k) {
      ++kc_instances;
      kc_bad += acq::kcenter_greedy(labeled, pool, k) != oracle::brute_kcenter(labeled, pool.ids, pool.features, k);
    }
  }

  double td_worst = 0;
  for (int stream = 0; stream < 100; ++stream) {
    const std::size_t C = 2 + static_cast<std::size_t>(stream) % 12;
    const std::size_t len = 1 + rng() % 300;
    auto rec = td::td_init(C);
    std::vector<std::vector<double>> raw;
    for (std::size_t i = 0; i < len; ++i) {
      const auto p = testing_support::random_prob(C, rng);
      raw.emplace_back(p.values().begin(), p.values().end());
      rec = td::td_update(rec, p);
    }
    const auto ref = oracle::naive_mean(raw);
    const auto got = td::td_value(rec);
    for (std::size_t c = 0; c < C; ++c) td_worst = std::max(td_worst, std::abs(got[c] - ref[c]));
  }
  set_warnings_enabled(true);
  const double secs = seconds_since(t0);
  return {topk_bad == 0 && kc_bad == 0 && td_worst <= kOracleTol && secs < kOracleSeconds,
          "top-k mismatches " + std::to_string(topk_bad) + "/1000, k-center mismatches " + std::to_string(kc_bad) +
              "/" + std::to_string(kc_instances) + " (100 point sets, n<=8), TD mean max deviation " +
              fmt("%.3g", td_worst) + " over 100 streams, " + fmt("%.2f", secs) + " s"};
}

// ---- 8 ----
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = run::parse_config_text(R"({
    "seeds": [3, 4],
    "dataset": {"classes": 6, "dim": 8, "per_class": 80, "imbalance": {"ratio": 4, "minor_classes": [4, 5]}},
    "train": {"epochs": 12, "optimizer": {"decay_epoch": 10}},
    "al": {"initial_labeled": 12, "budget": 10, "cycles": 3, "subset_size": 60},
    "theory": {"runs": 20}
  })");
  const auto base = fs::temp_directory_path() / "tidal_acceptance_determinism";
  std::vector<std::vector<fs::path>> artifacts(2);
  for (int rep = 0; rep < 2; ++rep) {
    const auto dir = base / (rep == 0 ? "first" : "second");
    fs::remove_all(dir);
    for (auto cmd : {run::Command::al_run, run::Command::pilot, run::Command::kl_analysis, run::Command::theory_sde,
                     run::Command::theory_closed_form, run::Command::gen_data}) {
      run::RunManifest m;
      m.command = cmd;
      m.out_dir = dir;
      m.strategies = {est::StrategyKind::random, est::StrategyKind::tidal_entropy, est::StrategyKind::coreset};
      m.jobs = rep == 0 ? 1 : 3;
      m.analysis = true;
      const auto res = run::dispatch(cfg, m);
      if (res.exit_code != 0) return {false, "dispatch of " + run::to_string(cmd) + " failed"};
      for (const auto& a : res.artifacts) artifacts[static_cast<std::size_t>(rep)].push_back(a.lexically_relative(dir));
    }
  }
  std::size_t differing = 0;
  const bool same_list = artifacts[0] == artifacts[1];
  if (same_list) {
    for (const auto& rel : artifacts[0]) differing += slurp(base / "first" / rel) != slurp(base / "second" / rel);
  }
  const double secs = seconds_since(t0);
  return {same_list && differing == 0 && !artifacts[0].empty() && secs < kDeterminismSeconds,
          std::to_string(artifacts[0].size()) + " CSV files across all six commands, " + std::to_string(differing) +
              " differ between runs (jobs 1 vs 3), " + fmt("%.1f", secs) + " s"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  PilotRuns pilots;
  bool pilots_ready = false;
  auto need_pilots = [&]() -> const PilotRuns& {
    if (!pilots_ready) {
      pilots = run_pilots();
      pilots_ready = true;
    }
    return pilots;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", gradients},
      {2, "entropy/margin closed forms", closed_forms},
      {3, "easy-vs-hard logit dynamics", elasticity},
      {4, "pilot minor-class separation", [&] { return pilot_separation(need_pilots()); }},
      {5, "predicted TD converges to actual TD", [&] { return kl_convergence(need_pilots()); }},
      {6, "active-learning sanity band", al_band},
      {7, "oracle equivalences", oracle_equivalences},
      {8, "end-to-end determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] criterion %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
