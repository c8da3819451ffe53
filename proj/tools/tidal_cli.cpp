#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "tidal/tidal.h"

namespace {

int report_failure(const char* what) {
  std::fprintf(stderr, "tidal: %s: %s\n", what, tidal_last_error());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active learning with training dynamics: experiments and theory checks"};
  std::string command;
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> strategies;
  unsigned jobs = 1;
  bool analysis = false;
  bool quiet = false;

  app.add_option("command", command,
                 "al-run | pilot | kl-analysis | theory-sde | theory-closed-form | gen-data")
      ->required()
      ->check(CLI::IsMember({"al-run", "pilot", "kl-analysis", "theory-sde", "theory-closed-form", "gen-data"}));
  app.add_option("--config,-c", config_path, "JSON configuration file (defaults apply when omitted)")
      ->check(CLI::ExistingFile);
  app.add_option("--out,-o", out_dir, "Output directory")->capture_default_str();
  app.add_option("--seeds", seeds, "Comma-separated seeds (overrides the config)")->delimiter(',');
  app.add_option("--strategies", strategies, "Comma-separated acquisition strategies for al-run")->delimiter(',');
  app.add_option("--jobs,-j", jobs, "Maximum concurrent runs")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_flag("--analysis", analysis, "Record per-epoch test predictions and write KL curves");
  app.add_flag("--quiet,-q", quiet, "Suppress warnings");
  CLI11_PARSE(app, argc, argv);

  tidal_set_warnings(quiet ? 0 : 1);

  tidal_config* cfg = nullptr;
  const tidal_status load =
      config_path.empty() ? tidal_config_default(&cfg) : tidal_config_load(config_path.c_str(), &cfg);
  if (load != TIDAL_OK) return report_failure("config");

  tidal_manifest m{};
  if (tidal_command_from_name(command.c_str(), &m.command) != TIDAL_OK) {
    tidal_config_free(cfg);
    return report_failure("command");
  }
  std::vector<const char*> strategy_ptrs;
  for (const auto& s : strategies) strategy_ptrs.push_back(s.c_str());
  m.out_dir = out_dir.c_str();
  m.seeds = seeds.empty() ? nullptr : seeds.data();
  m.n_seeds = seeds.size();
  m.strategies = strategy_ptrs.empty() ? nullptr : strategy_ptrs.data();
  m.n_strategies = strategy_ptrs.size();
  m.jobs = jobs;
  m.analysis = analysis ? 1 : 0;

  tidal_run* run = nullptr;
  const tidal_status st = tidal_dispatch(cfg, &m, &run);
  tidal_config_free(cfg);
  if (run == nullptr) return report_failure(command.c_str());

  for (size_t i = 0; i < tidal_run_message_count(run); ++i) std::printf("%s\n", tidal_run_message(run, i));
  std::printf("%zu files written under %s\n", tidal_run_artifact_count(run), out_dir.c_str());
  const int code = tidal_run_exit_code(run);
  tidal_run_free(run);
  if (st != TIDAL_OK) std::fprintf(stderr, "tidal: %s\n", tidal_last_error());
  return code == 0 ? 0 : 1;
}
