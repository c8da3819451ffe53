#include "tidal/dispatch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "tidal/csv.hpp"
#include "tidal/errors.hpp"
#include "tidal/estimators.hpp"
#include "tidal/rng.hpp"

namespace tidal::run {

namespace fs = std::filesystem;

std::string to_string(Command c) {
  switch (c) {
    case Command::al_run: return "al-run";
    case Command::pilot: return "pilot";
    case Command::kl_analysis: return "kl-analysis";
    case Command::theory_sde: return "theory-sde";
    case Command::theory_closed_form: return "theory-closed-form";
    case Command::gen_data: return "gen-data";
  }
  return "unknown";
}

Command command_from_string(const std::string& s) {
  for (auto c : {Command::al_run, Command::pilot, Command::kl_analysis, Command::theory_sde,
                 Command::theory_closed_form, Command::gen_data}) {
    if (to_string(c) == s) return c;
  }
  throw InputError("unknown command '" + s + "'");
}

namespace {

/// Output of one (seed, strategy) run, merged after all runs complete.
struct RunOutput {
  std::string id;
  std::string error;
  std::vector<fs::path> files;
  std::vector<std::vector<std::string>> summary_rows;
  std::vector<std::string> messages;
};

struct RunSpec {
  std::uint64_t seed = 0;
  est::StrategyKind strategy = est::StrategyKind::random;
  std::string id;
};

void write_file(const fs::path& path, const std::string& content, RunOutput& out) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << content;
  if (!f) throw IoError("write failed for " + path.string());
  out.files.push_back(path);
}

template <class Fn>
std::string to_text(Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

data::Prepared prepare_for_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  auto spec = cfg.dataset;
  spec.seed = derive_seed(cfg.dataset.seed, seed);
  return data::prepare(spec);
}

std::string fmt(double v) { return csv::format_double(v); }

void run_al(const ExperimentConfig& cfg, const RunManifest& m, const RunSpec& rs, RunOutput& out) {
  const auto data = prepare_for_seed(cfg, rs.seed);
  auto al_cfg = cfg.al;
  al_cfg.strategy = rs.strategy;
  al_cfg.seed = rs.seed;
  const std::string name = est::to_string(rs.strategy);
  const std::string stem = name + "_seed" + std::to_string(rs.seed);
  std::vector<al::CycleReport> all;
  const auto reports = al::run_experiment(al_cfg, data, m.analysis, [&](const al::CycleReport& r) {
    al::CycleReport light;
    light.cycle = r.cycle;
    light.scores = r.scores;
    light.kl_rows = r.kl_rows;
    light.notes = r.notes;
    all.push_back(std::move(light));
  });

  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) {
    rows.push_back({name, std::to_string(rs.seed), std::to_string(r.cycle), std::to_string(r.labeled_count),
                    fmt(r.test_accuracy), fmt(r.minor_class_accuracy)});
  }
  write_file(m.out_dir / ("results_" + stem + ".csv"), to_text([&](std::ostream& os) {
               csv::write_row(os, {"strategy", "seed", "cycle", "labeled_count", "test_accuracy",
                                   "minor_class_accuracy"});
               for (const auto& r : rows) csv::write_row(os, r);
             }),
             out);
  for (const auto& r : all) {
    const std::string cyc = "_cycle" + std::to_string(r.cycle);
    if (!r.scores.empty()) {
      write_file(m.out_dir / "scores" / ("scores_" + stem + cyc + ".csv"),
                 to_text([&](std::ostream& os) { al::write_score_csv(r.scores, os); }), out);
    }
    if (m.analysis) {
      write_file(m.out_dir / "kl" / ("kl_" + stem + cyc + ".csv"),
                 to_text([&](std::ostream& os) { al::write_kl_csv(r.kl_rows, os); }), out);
    }
    for (const auto& note : r.notes) out.messages.push_back(rs.id + " cycle " + std::to_string(r.cycle) + ": " + note);
  }
  out.summary_rows = std::move(rows);
  if (!reports.empty()) {
    out.messages.push_back(rs.id + ": final accuracy " + fmt(reports.back().test_accuracy) + " with " +
                           std::to_string(reports.back().labeled_count) + " labels");
  }
}

void run_pilot_cmd(const ExperimentConfig& cfg, const RunManifest& m, const RunSpec& rs, RunOutput& out,
                   bool kl_only) {
  const auto data = prepare_for_seed(cfg, rs.seed);
  const bool analysis = kl_only || m.analysis;
  const auto res = al::run_pilot(data, cfg.al.net, cfg.al.train, rs.seed, analysis);
  const std::string seed = std::to_string(rs.seed);
  if (!kl_only) {
    write_file(m.out_dir / ("pilot_scores_seed" + seed + ".csv"),
               to_text([&](std::ostream& os) { al::write_score_csv(res.scores, os); }), out);
    write_file(m.out_dir / ("pilot_td_seed" + seed + ".csv"),
               to_text([&](std::ostream& os) { res.td.write_csv(os); }), out);
    for (const auto& [est_name, auc] : res.auroc) out.summary_rows.push_back({seed, est_name, fmt(auc)});
  }
  if (analysis) {
    write_file(m.out_dir / ("kl_seed" + seed + ".csv"),
               to_text([&](std::ostream& os) { al::write_kl_csv(res.kl_rows, os); }), out);
    if (kl_only && !res.kl_rows.empty()) {
      const auto& last = res.kl_rows.back();
      out.summary_rows.push_back({seed, std::to_string(last.epoch), fmt(last.kl_module), fmt(last.kl_snapshot)});
    }
  }
}

void run_theory_sde(const ExperimentConfig& cfg, const RunManifest& m, const RunSpec& rs, RunOutput& out) {
  auto params = cfg.theory.params;
  params.seed = rs.seed;
  const auto traj = theory::simulate_discrete_mean(params, cfg.theory.runs);
  const std::string seed = std::to_string(rs.seed);
  write_file(m.out_dir / ("theory_discrete_seed" + seed + ".csv"),
             to_text([&](std::ostream& os) { theory::write_trajectory_csv(traj, os); }), out);
  const auto gap = theory::convergence_gap(traj);
  out.summary_rows.push_back({seed, fmt(static_cast<double>(gap.size() - 1) * traj.time_step), fmt(gap.back())});
}

std::vector<RunSpec> expand_runs(const ExperimentConfig& cfg, const RunManifest& m) {
  const auto& seeds = m.seeds.empty() ? cfg.seeds : m.seeds;
  std::vector<RunSpec> runs;
  if (m.command == Command::theory_closed_form) return runs;
  for (auto s : seeds) {
    if (m.command == Command::al_run) {
      const auto strategies = m.strategies.empty() ? std::vector{cfg.al.strategy} : m.strategies;
      for (auto st : strategies) runs.push_back({s, st, est::to_string(st) + "/seed" + std::to_string(s)});
    } else {
      runs.push_back({s, cfg.al.strategy, to_string(m.command) + "/seed" + std::to_string(s)});
    }
  }
  return runs;
}

}  // namespace

DispatchResult dispatch(const ExperimentConfig& cfg, const RunManifest& manifest) {
  cfg.validate();
  if (manifest.out_dir.empty()) throw InputError("dispatch: output directory required");
  if (manifest.seeds.empty() && cfg.seeds.empty()) throw InputError("dispatch: at least one seed required");
  std::error_code ec;
  fs::create_directories(manifest.out_dir, ec);
  if (ec || !fs::is_directory(manifest.out_dir)) {
    throw IoError("cannot create output directory " + manifest.out_dir.string());
  }
  if (manifest.command == Command::al_run) {
    fs::create_directories(manifest.out_dir / "scores");
    if (manifest.analysis) fs::create_directories(manifest.out_dir / "kl");
  }

  DispatchResult result;
  RunOutput shared;

  if (manifest.command == Command::theory_closed_form) {
    write_file(manifest.out_dir / "theory_closed_form.csv", to_text([&](std::ostream& os) {
                 csv::write_row(os, {"s_y", "C", "entropy", "margin"});
                 for (auto c : cfg.theory.class_counts) {
                   for (double s : cfg.theory.s_grid) {
                     csv::write_row(os, {fmt(s), std::to_string(c), fmt(theory::theorem2_entropy(s, c)),
                                         fmt(theory::theorem2_margin(s, c))});
                   }
                 }
               }),
               shared);
    result.messages.push_back("closed forms written for " + std::to_string(cfg.theory.class_counts.size()) +
                              " class counts x " + std::to_string(cfg.theory.s_grid.size()) + " s_y values");
  }
  if (manifest.command == Command::theory_sde) {
    const auto ode = theory::integrate_ode(cfg.theory.params, cfg.theory.dt, cfg.theory.t_end);
    write_file(manifest.out_dir / "theory_ode.csv",
               to_text([&](std::ostream& os) { theory::write_trajectory_csv(ode, os); }), shared);
    const auto gap = theory::convergence_gap(ode);
    const double slope = gap.size() > 1 ? (gap[1] - gap[0]) / ode.time_step : 0.0;
    result.messages.push_back("ode: initial gap slope " + fmt(slope) + ", gap at t_end " + fmt(gap.back()));
  }

  const auto runs = expand_runs(cfg, manifest);
  std::vector<RunOutput> outputs(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      auto& out = outputs[i];
      out.id = runs[i].id;
      try {
        switch (manifest.command) {
          case Command::al_run: run_al(cfg, manifest, runs[i], out); break;
          case Command::pilot: run_pilot_cmd(cfg, manifest, runs[i], out, false); break;
          case Command::kl_analysis: run_pilot_cmd(cfg, manifest, runs[i], out, true); break;
          case Command::theory_sde: run_theory_sde(cfg, manifest, runs[i], out); break;
          case Command::gen_data: {
            const auto data = prepare_for_seed(cfg, runs[i].seed);
            const std::string seed = std::to_string(runs[i].seed);
            write_file(manifest.out_dir / ("dataset_seed" + seed + "_train.csv"),
                       to_text([&](std::ostream& os) { data::write_csv(data.train, os); }), out);
            write_file(manifest.out_dir / ("dataset_seed" + seed + "_test.csv"),
                       to_text([&](std::ostream& os) { data::write_csv(data.test, os); }), out);
            out.messages.push_back(out.id + ": " + std::to_string(data.train.samples.size()) + " train / " +
                                   std::to_string(data.test.samples.size()) + " test samples");
            break;
          }
          case Command::theory_closed_form: break;
        }
      } catch (const std::exception& e) {
        out.error = e.what();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(manifest.jobs, static_cast<unsigned>(runs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  result.artifacts = shared.files;
  std::vector<std::vector<std::string>> summary;
  for (auto& o : outputs) {
    if (!o.error.empty()) {
      result.exit_code = 1;
      result.messages.push_back("run " + o.id + " failed: " + o.error);
      continue;
    }
    result.artifacts.insert(result.artifacts.end(), o.files.begin(), o.files.end());
    result.messages.insert(result.messages.end(), o.messages.begin(), o.messages.end());
    summary.insert(summary.end(), o.summary_rows.begin(), o.summary_rows.end());
  }

  RunOutput merged;
  switch (manifest.command) {
    case Command::al_run:
      write_file(manifest.out_dir / "summary.csv", to_text([&](std::ostream& os) {
                   csv::write_row(os, {"strategy", "seed", "cycle", "labeled_count", "test_accuracy",
                                       "minor_class_accuracy"});
                   for (const auto& r : summary) csv::write_row(os, r);
                 }),
                 merged);
      break;
    case Command::pilot: {
      write_file(manifest.out_dir / "pilot_auroc.csv", to_text([&](std::ostream& os) {
                   csv::write_row(os, {"seed", "estimator", "auroc"});
                   for (const auto& r : summary) csv::write_row(os, r);
                 }),
                 merged);
      std::map<std::string, std::pair<double, int>> mean;
      std::vector<std::string> order;
      for (const auto& r : summary) {
        if (!mean.count(r[1])) order.push_back(r[1]);
        auto& [sum, n] = mean[r[1]];
        sum += csv::parse_double(r[2], 0);
        ++n;
      }
      for (const auto& name : order) {
        result.messages.push_back("separation AUROC " + name + ": " + fmt(mean[name].first / mean[name].second));
      }
      break;
    }
    case Command::kl_analysis:
      write_file(manifest.out_dir / "kl_summary.csv", to_text([&](std::ostream& os) {
                   csv::write_row(os, {"seed", "epoch", "kl_module", "kl_snapshot"});
                   for (const auto& r : summary) csv::write_row(os, r);
                 }),
                 merged);
      for (const auto& r : summary) {
        result.messages.push_back("seed " + r[0] + " final epoch " + r[1] + ": KL module " + r[2] +
                                  ", KL snapshot " + r[3]);
      }
      break;
    case Command::theory_sde:
      write_file(manifest.out_dir / "theory_sde_summary.csv", to_text([&](std::ostream& os) {
                   csv::write_row(os, {"seed", "t_end", "gap"});
                   for (const auto& r : summary) csv::write_row(os, r);
                 }),
                 merged);
      for (const auto& r : summary) result.messages.push_back("discrete seed " + r[0] + ": gap at t=" + r[1] + " is " + r[2]);
      break;
    default:
      break;
  }
  result.artifacts.insert(result.artifacts.end(), merged.files.begin(), merged.files.end());
  return result;
}

}  // namespace tidal::run
