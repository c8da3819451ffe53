#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tidal/alengine.hpp"
#include "tidal/datasets.hpp"
#include "tidal/theorysim.hpp"

namespace tidal::run {

struct TheoryConfig {
  theory::ElasticityParams params;
  double dt = 1e-3;
  double t_end = 5.0;
  std::size_t runs = 200;
  std::vector<double> s_grid{0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
  std::vector<std::size_t> class_counts{2, 3, 10, 100};

  friend bool operator==(const TheoryConfig&, const TheoryConfig&) = default;
};

/// Everything a run needs. Sections: seeds, dataset, net, train (with
/// optimizer), al, theory. Missing keys take defaults; unknown keys are errors.
struct ExperimentConfig {
  std::vector<std::uint64_t> seeds{0};
  data::DatasetSpec dataset;
  al::ALConfig al;  // net shape, training and AL protocol
  TheoryConfig theory;

  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parse JSON text. Errors are ParseError with the offending key path
/// (e.g. "theory.alpha_h") or InputError naming the violated constraint.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Full JSON dump with every field explicit; parse_config_text() inverts it.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace tidal::run
