#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace tidal::data {

using SampleId = std::int64_t;

struct Sample {
  SampleId id = 0;
  std::vector<double> features;
  std::size_t label = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::size_t n_classes = 0;
  std::size_t dim = 0;
  std::vector<Sample> samples;

  std::vector<std::size_t> class_counts() const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

enum class Generator { gaussian_mixture, concentric_rings, csv_file };
enum class ImbalanceProfile { step, exponential };

std::string to_string(Generator g);
Generator generator_from_string(const std::string& s);
std::string to_string(ImbalanceProfile p);
ImbalanceProfile profile_from_string(const std::string& s);

struct ImbalanceSpec {
  double ratio = 1.0;
  ImbalanceProfile profile = ImbalanceProfile::step;
  std::vector<std::size_t> minor_classes;

  friend bool operator==(const ImbalanceSpec&, const ImbalanceSpec&) = default;
};

struct DatasetSpec {
  Generator generator = Generator::gaussian_mixture;
  std::size_t n_classes = 10;
  std::size_t dim = 16;
  std::size_t per_class = 200;  // N_max, before imbalancing
  /// Gaussian mixture: radius of the sphere carrying the class means.
  /// Rings: radius of class 0; class c sits at radius * (c + 1).
  double radius = 3.0;
  double noise = 1.0;  // per-coordinate std (mixture) or radial std (rings)
  ImbalanceSpec imbalance;
  double test_fraction = 0.3;
  bool balanced_test = true;  // imbalance applies to the training split only
  std::string path;           // csv_file generator
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

/// Class means on a seeded sphere, isotropic Gaussian noise.
/// Ids are 0..C*N_max-1 in class-major order.
Dataset gen_gaussian_mixture(const DatasetSpec& spec);
/// Class means used by gen_gaussian_mixture for this spec.
std::vector<std::vector<double>> gaussian_mixture_means(const DatasetSpec& spec);

/// 2-D rings, uniform angle, Gaussian radial noise.
Dataset gen_concentric_rings(const DatasetSpec& spec);

/// Per-class target counts for a dataset whose largest class has n_max samples.
/// Throws InputError if any target rounds to zero.
std::vector<std::size_t> imbalance_targets(std::size_t n_classes, std::size_t n_max, double ratio,
                                           ImbalanceProfile profile,
                                           const std::vector<std::size_t>& minor_classes);

/// Seeded removal without replacement down to imbalance_targets(). Surviving
/// samples keep their relative order, features, and labels.
Dataset apply_imbalance(const Dataset& ds, double ratio, ImbalanceProfile profile,
                        const std::vector<std::size_t>& minor_classes, std::uint64_t seed);

/// Stratified split; classes with fewer than 2 samples go entirely to train.
std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed);

/// Header: id,feature_0,...,feature_{d-1},label
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& ds, const std::filesystem::path& path);
void write_csv(const Dataset& ds, std::ostream& out);
Dataset read_csv(std::istream& in);

/// Train/test pair built from a spec: generate, split, then imbalance the training split.
struct Prepared {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> minor_classes;  // empty when no imbalance was applied
};
Prepared prepare(const DatasetSpec& spec);

}  // namespace tidal::data
