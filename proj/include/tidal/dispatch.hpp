#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tidal/config.hpp"
#include "tidal/estimators.hpp"

namespace tidal::run {

enum class Command { al_run, pilot, kl_analysis, theory_sde, theory_closed_form, gen_data };

std::string to_string(Command c);
Command command_from_string(const std::string& s);

struct RunManifest {
  Command command = Command::al_run;
  std::filesystem::path out_dir;
  std::vector<std::uint64_t> seeds;             // empty: use the config's seeds
  std::vector<est::StrategyKind> strategies;    // empty: use the config's strategy
  unsigned jobs = 1;
  bool analysis = false;  // keep per-epoch test snapshots and emit KL curves
};

struct DispatchResult {
  int exit_code = 0;
  std::vector<std::string> messages;              // human-readable summary lines
  std::vector<std::filesystem::path> artifacts;   // every file written, in a fixed order
};

/// Run the cartesian product of seeds x strategies (strategies only matter for
/// al-run), up to `jobs` at a time. Each run writes only its own files; merged
/// summaries are written once every run has finished. Failed runs are reported
/// by identifier and make exit_code nonzero.
DispatchResult dispatch(const ExperimentConfig& cfg, const RunManifest& manifest);

}  // namespace tidal::run
