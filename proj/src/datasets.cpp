#include "tidal/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "tidal/csv.hpp"
#include "tidal/errors.hpp"
#include "tidal/rng.hpp"

namespace tidal::data {

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(n_classes, 0);
  for (const auto& s : samples) ++counts.at(s.label);
  return counts;
}

std::string to_string(Generator g) {
  switch (g) {
    case Generator::gaussian_mixture: return "gaussian_mixture";
    case Generator::concentric_rings: return "concentric_rings";
    case Generator::csv_file: return "csv_file";
  }
  return "unknown";
}

Generator generator_from_string(const std::string& s) {
  if (s == "gaussian_mixture") return Generator::gaussian_mixture;
  if (s == "concentric_rings") return Generator::concentric_rings;
  if (s == "csv_file") return Generator::csv_file;
  throw InputError("unknown generator '" + s + "'");
}

std::string to_string(ImbalanceProfile p) { return p == ImbalanceProfile::step ? "step" : "exponential"; }

ImbalanceProfile profile_from_string(const std::string& s) {
  if (s == "step") return ImbalanceProfile::step;
  if (s == "exponential") return ImbalanceProfile::exponential;
  throw InputError("unknown imbalance profile '" + s + "'");
}

void DatasetSpec::validate() const {
  if (generator != Generator::csv_file) {
    if (n_classes < 2) throw InputError("dataset: classes must be >= 2");
    if (per_class == 0) throw InputError("dataset: per_class must be positive");
    if (!(noise >= 0.0)) throw InputError("dataset: noise must be >= 0");
    if (!(radius > 0.0)) throw InputError("dataset: radius must be > 0");
  }
  if (generator == Generator::gaussian_mixture && dim < 2) throw InputError("dataset: dim must be >= 2");
  if (generator == Generator::concentric_rings && dim != 2) {
    throw InputError("dataset: concentric_rings requires dim = 2");
  }
  if (generator == Generator::csv_file && path.empty()) throw InputError("dataset: csv_file requires a path");
  if (!(imbalance.ratio >= 1.0)) throw InputError("dataset: imbalance ratio must be >= 1");
  for (auto c : imbalance.minor_classes) {
    if (generator != Generator::csv_file && c >= n_classes) {
      throw InputError("dataset: minor class " + std::to_string(c) + " out of range");
    }
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InputError("dataset: test_fraction must be in (0,1)");
  }
}

std::vector<std::vector<double>> gaussian_mixture_means(const DatasetSpec& spec) {
  Rng rng(derive_seed(spec.seed, "means"));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> means(spec.n_classes, std::vector<double>(spec.dim));
  for (auto& m : means) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : m) {
        v = normal(rng);
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& v : m) v *= spec.radius / norm;
  }
  return means;
}

Dataset gen_gaussian_mixture(const DatasetSpec& spec) {
  spec.validate();
  if (spec.generator != Generator::gaussian_mixture) throw InputError("spec is not a gaussian_mixture");
  const auto means = gaussian_mixture_means(spec);
  Rng rng(derive_seed(spec.seed, "samples"));
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset ds{spec.n_classes, spec.dim, {}};
  ds.samples.reserve(spec.n_classes * spec.per_class);
  SampleId id = 0;
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      Sample s{id++, means[c], c};
      for (double& v : s.features) v += spec.noise * normal(rng);
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

Dataset gen_concentric_rings(const DatasetSpec& spec) {
  spec.validate();
  if (spec.generator != Generator::concentric_rings) throw InputError("spec is not concentric_rings");
  Rng rng(derive_seed(spec.seed, "rings"));
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset ds{spec.n_classes, 2, {}};
  SampleId id = 0;
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    const double r_c = spec.radius * static_cast<double>(c + 1);
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      const double theta = angle(rng);
      const double r = r_c + spec.noise * normal(rng);
      ds.samples.push_back({id++, {r * std::cos(theta), r * std::sin(theta)}, c});
    }
  }
  return ds;
}

std::vector<std::size_t> imbalance_targets(std::size_t n_classes, std::size_t n_max, double ratio,
                                           ImbalanceProfile profile,
                                           const std::vector<std::size_t>& minor_classes) {
  if (!(ratio >= 1.0)) throw InputError("imbalance: ratio must be >= 1");
  if (n_classes < 2) throw InputError("imbalance: need at least 2 classes");
  std::vector<std::size_t> targets(n_classes, n_max);
  const double nm = static_cast<double>(n_max);
  if (profile == ImbalanceProfile::step) {
    // tolerance keeps exact quotients such as 1000/10 from flooring to 99
    const auto minor = static_cast<std::size_t>(std::floor(nm / ratio + 1e-9));
    for (auto c : minor_classes) {
      if (c >= n_classes) throw InputError("imbalance: minor class out of range");
      targets[c] = minor;
    }
  } else {
    for (std::size_t c = 0; c < n_classes; ++c) {
      const double e = -static_cast<double>(c) / static_cast<double>(n_classes - 1);
      targets[c] = static_cast<std::size_t>(std::floor(nm * std::pow(ratio, e) + 1e-9));
    }
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (targets[c] == 0) {
      throw InputError("imbalance: ratio " + std::to_string(ratio) + " leaves class " +
                       std::to_string(c) + " empty");
    }
  }
  return targets;
}

Dataset apply_imbalance(const Dataset& ds, double ratio, ImbalanceProfile profile,
                        const std::vector<std::size_t>& minor_classes, std::uint64_t seed) {
  const auto counts = ds.class_counts();
  const std::size_t n_max = *std::max_element(counts.begin(), counts.end());
  const auto targets = imbalance_targets(ds.n_classes, n_max, ratio, profile, minor_classes);

  Rng rng(derive_seed(seed, "imbalance"));
  std::vector<bool> keep(ds.samples.size(), true);
  for (std::size_t c = 0; c < ds.n_classes; ++c) {
    if (counts[c] <= targets[c]) continue;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      if (ds.samples[i].label == c) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = targets[c]; j < members.size(); ++j) keep[members[j]] = false;
  }
  Dataset out{ds.n_classes, ds.dim, {}};
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    if (keep[i]) out.samples.push_back(ds.samples[i]);
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InputError("split: test_fraction must be in (0,1)");
  Rng rng(derive_seed(seed, "split"));
  std::vector<bool> to_test(ds.samples.size(), false);
  for (std::size_t c = 0; c < ds.n_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      if (ds.samples[i].label == c) members.push_back(i);
    }
    if (members.empty()) continue;
    if (members.size() < 2) {
      warn("split: class " + std::to_string(c) + " has fewer than 2 samples; kept in train");
      continue;
    }
    std::shuffle(members.begin(), members.end(), rng);
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
    for (std::size_t j = 0; j < n_test; ++j) to_test[members[j]] = true;
  }
  Dataset train{ds.n_classes, ds.dim, {}};
  Dataset test{ds.n_classes, ds.dim, {}};
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    (to_test[i] ? test : train).samples.push_back(ds.samples[i]);
  }
  return {std::move(train), std::move(test)};
}

void write_csv(const Dataset& ds, std::ostream& out) {
  std::vector<std::string> header{"id"};
  for (std::size_t d = 0; d < ds.dim; ++d) header.push_back("feature_" + std::to_string(d));
  header.push_back("label");
  csv::write_row(out, header);
  for (const auto& s : ds.samples) {
    out << s.id;
    for (double v : s.features) out << ',' << csv::format_double(v);
    out << ',' << s.label << '\n';
  }
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_csv(ds, out);
}

Dataset read_csv(std::istream& in) {
  const auto table = csv::read_table(in);
  const auto& h = table.header;
  if (h.size() < 3 || h.front() != "id" || h.back() != "label") {
    throw ParseError("line 1", "header must be id,feature_0,...,feature_{d-1},label");
  }
  Dataset ds;
  ds.dim = h.size() - 2;
  for (std::size_t d = 0; d < ds.dim; ++d) {
    if (h[d + 1] != "feature_" + std::to_string(d)) {
      throw ParseError("line 1", "expected column feature_" + std::to_string(d));
    }
  }
  std::set<SampleId> seen;
  std::size_t max_label = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.lines[r];
    Sample s;
    s.id = csv::parse_int(row[0], line);
    if (!seen.insert(s.id).second) {
      throw ParseError("line " + std::to_string(line), "duplicate id " + std::to_string(s.id));
    }
    for (std::size_t d = 0; d < ds.dim; ++d) s.features.push_back(csv::parse_double(row[d + 1], line));
    const long long label = csv::parse_int(row.back(), line);
    if (label < 0) throw ParseError("line " + std::to_string(line), "negative label");
    s.label = static_cast<std::size_t>(label);
    max_label = std::max(max_label, s.label);
    ds.samples.push_back(std::move(s));
  }
  ds.n_classes = ds.samples.empty() ? 0 : max_label + 1;
  return ds;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_csv(in);
}

Prepared prepare(const DatasetSpec& spec) {
  spec.validate();
  Dataset full;
  switch (spec.generator) {
    case Generator::gaussian_mixture: full = gen_gaussian_mixture(spec); break;
    case Generator::concentric_rings: full = gen_concentric_rings(spec); break;
    case Generator::csv_file:
      full = load_csv(spec.path);
      if (full.n_classes < 2) throw InputError("dataset: csv file needs at least 2 classes");
      break;
  }
  Prepared out;
  const auto& im = spec.imbalance;
  if (spec.balanced_test) {
    auto [train, test] = split(full, spec.test_fraction, spec.seed);
    out.train = im.ratio > 1.0 ? apply_imbalance(train, im.ratio, im.profile, im.minor_classes, spec.seed)
                               : std::move(train);
    out.test = std::move(test);
  } else {
    auto reduced = im.ratio > 1.0 ? apply_imbalance(full, im.ratio, im.profile, im.minor_classes, spec.seed)
                                  : std::move(full);
    std::tie(out.train, out.test) = split(reduced, spec.test_fraction, spec.seed);
  }
  if (im.ratio > 1.0) {
    if (im.profile == ImbalanceProfile::step) {
      out.minor_classes = im.minor_classes;
      std::sort(out.minor_classes.begin(), out.minor_classes.end());
    } else {
      const auto counts = out.train.class_counts();
      const std::size_t top = *std::max_element(counts.begin(), counts.end());
      for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] < top) out.minor_classes.push_back(c);
      }
    }
  }
  return out;
}

}  // namespace tidal::data
