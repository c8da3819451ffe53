#include <doctest.h>

#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "tidal/datasets.hpp"
#include "tidal/errors.hpp"

using namespace tidal;
using namespace tidal::data;

namespace {

DatasetSpec mixture(std::size_t C, std::size_t dim, std::size_t per_class, double noise, std::uint64_t seed) {
  DatasetSpec s;
  s.n_classes = C;
  s.dim = dim;
  s.per_class = per_class;
  s.noise = noise;
  s.seed = seed;
  return s;
}

std::string dump(const Dataset& ds) {
  std::ostringstream ss;
  write_csv(ds, ss);
  return ss.str();
}

}  // namespace

TEST_CASE("noise-free mixture places every sample on its class mean") {
  const auto spec = mixture(4, 5, 10, 0.0, 3);
  const auto ds = gen_gaussian_mixture(spec);
  const auto means = gaussian_mixture_means(spec);
  REQUIRE(ds.samples.size() == 40);
  for (const auto& s : ds.samples) CHECK(s.features == means[s.label]);
  for (const auto& m : means) CHECK(oracle::dist(m, std::vector<double>(5, 0.0)) == doctest::Approx(spec.radius));
}

TEST_CASE("generators are deterministic in the seed") {
  const auto spec = mixture(3, 4, 20, 1.0, 11);
  CHECK(dump(gen_gaussian_mixture(spec)) == dump(gen_gaussian_mixture(spec)));
  auto other = spec;
  other.seed = 12;
  CHECK(dump(gen_gaussian_mixture(spec)) != dump(gen_gaussian_mixture(other)));
  DatasetSpec rings;
  rings.generator = Generator::concentric_rings;
  rings.n_classes = 2;
  rings.dim = 2;
  rings.noise = 0.1;
  CHECK(dump(gen_concentric_rings(rings)) == dump(gen_concentric_rings(rings)));
}

TEST_CASE("well-separated mixture is solved by the nearest true mean") {
  const auto spec = mixture(6, 8, 100, 0.1, 5);
  const auto ds = gen_gaussian_mixture(spec);
  const auto means = gaussian_mixture_means(spec);
  std::size_t correct = 0;
  for (const auto& s : ds.samples) correct += oracle::nearest_mean(means, s.features) == s.label;
  CHECK(correct == ds.samples.size());
}

TEST_CASE("concentric rings") {
  DatasetSpec spec;
  spec.generator = Generator::concentric_rings;
  spec.n_classes = 3;
  spec.dim = 2;
  spec.radius = 1.0;
  spec.noise = 0.0;
  spec.per_class = 50;
  for (const auto& s : gen_concentric_rings(spec).samples) {
    CHECK(std::hypot(s.features[0], s.features[1]) == doctest::Approx(double(s.label + 1)).epsilon(1e-12));
  }
  spec.n_classes = 2;
  spec.noise = 0.05;
  spec.per_class = 1000;
  const auto ds = gen_concentric_rings(spec);
  std::size_t correct = 0;
  for (const auto& s : ds.samples) correct += oracle::radial_threshold(s.features, 1.5) == s.label;
  CHECK(static_cast<double>(correct) / ds.samples.size() > 0.99);
  spec.dim = 3;
  CHECK_THROWS_AS(gen_concentric_rings(spec), InputError);
}

TEST_CASE("step imbalance") {
  CHECK(imbalance_targets(10, 1000, 10, ImbalanceProfile::step, {5, 6, 7, 8, 9}) ==
        std::vector<std::size_t>{1000, 1000, 1000, 1000, 1000, 100, 100, 100, 100, 100});
  auto spec = mixture(10, 3, 1000, 1.0, 1);
  const auto ds = gen_gaussian_mixture(spec);
  const auto im = apply_imbalance(ds, 10, ImbalanceProfile::step, {5, 6, 7, 8, 9}, 7);
  const auto counts = im.class_counts();
  for (std::size_t c = 0; c < 10; ++c) CHECK(counts[c] == (c >= 5 ? 100u : 1000u));
  // membership only: every kept sample is unchanged
  std::map<std::int64_t, const Sample*> by_id;
  for (const auto& s : ds.samples) by_id[s.id] = &s;
  for (const auto& s : im.samples) CHECK(s == *by_id.at(s.id));
}

TEST_CASE("exponential imbalance") {
  CHECK(imbalance_targets(3, 100, 100, ImbalanceProfile::exponential, {}) ==
        std::vector<std::size_t>{100, 10, 1});
  CHECK_THROWS_AS(imbalance_targets(3, 100, 1000, ImbalanceProfile::exponential, {}), InputError);
  CHECK_THROWS_AS(imbalance_targets(3, 100, 0.5, ImbalanceProfile::step, {1}), InputError);
  // achieved ratio within rounding of the request
  for (double ratio : {2.0, 5.0, 10.0, 37.0, 50.0}) {
    const auto t = imbalance_targets(8, 500, ratio, ImbalanceProfile::exponential, {});
    const double achieved = double(t.front()) / double(t.back());
    CHECK(std::abs(achieved - ratio) / ratio <= 1.0 / double(t.back()) + 1e-12);
  }
}

TEST_CASE("ratio one keeps the dataset") {
  const auto ds = gen_gaussian_mixture(mixture(4, 3, 25, 1.0, 2));
  const auto same = apply_imbalance(ds, 1.0, ImbalanceProfile::exponential, {}, 3);
  CHECK(same == ds);
  const auto step = apply_imbalance(ds, 1.0, ImbalanceProfile::step, {0, 1}, 3);
  CHECK(step == ds);
}

TEST_CASE("stratified split") {
  const auto ds = gen_gaussian_mixture(mixture(4, 2, 10, 1.0, 9));
  const auto [train, test] = split(ds, 0.5, 1);
  for (auto c : train.class_counts()) CHECK(c == 5);
  for (auto c : test.class_counts()) CHECK(c == 5);

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    auto spec = mixture(3 + trial % 4, 2, 7 + rng() % 40, 1.0, trial);
    auto full = gen_gaussian_mixture(spec);
    full = apply_imbalance(full, 1.0 + double(rng() % 5), ImbalanceProfile::exponential, {}, trial);
    const double frac = 0.1 + 0.8 * double(rng() % 100) / 100.0;
    const auto [tr, te] = split(full, frac, trial);
    std::set<std::int64_t> ids;
    for (const auto& s : tr.samples) ids.insert(s.id);
    for (const auto& s : te.samples) CHECK(ids.insert(s.id).second);
    CHECK(ids.size() == full.samples.size());
    const auto all = full.class_counts();
    const auto tc = te.class_counts();
    for (std::size_t c = 0; c < all.size(); ++c) CHECK(std::abs(double(tc[c]) - frac * double(all[c])) <= 1.0);
  }
}

TEST_CASE("split keeps a singleton class in train") {
  Dataset ds{2, 1, {{0, {0.0}, 0}, {1, {1.0}, 0}, {2, {2.0}, 0}, {3, {3.0}, 1}}};
  const auto [train, test] = split(ds, 0.5, 0);
  CHECK(train.class_counts()[1] == 1);
  CHECK(test.class_counts()[1] == 0);
}

TEST_CASE("CSV round trip and errors") {
  auto ds = gen_gaussian_mixture(mixture(3, 4, 5, 1.3, 21));
  for (auto& s : ds.samples) s.id = s.id * 7 + 1000;  // non-contiguous ids
  const auto path = std::filesystem::temp_directory_path() / "tidal_ds_roundtrip.csv";
  save_csv(ds, path);
  const auto back = load_csv(path);
  CHECK(back == ds);
  std::filesystem::remove(path);

  std::istringstream missing("id,feature_0,feature_1\n0,1,2\n");
  CHECK_THROWS_AS(read_csv(missing), ParseError);
  std::istringstream bad_row("id,feature_0,label\n0,1.5,0\n1,2.5\n");
  try {
    read_csv(bad_row);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.where() == "line 3");
  }
  std::istringstream bad_number("id,feature_0,label\n0,abc,0\n");
  CHECK_THROWS_AS(read_csv(bad_number), ParseError);
  std::istringstream dup("id,feature_0,label\n4,1,0\n4,2,1\n");
  CHECK_THROWS_AS(read_csv(dup), ParseError);
  CHECK_THROWS_AS(load_csv("/nonexistent/dir/x.csv"), IoError);
}

TEST_CASE("prepare keeps the test split balanced and reports minor classes") {
  auto spec = mixture(4, 3, 100, 1.0, 8);
  spec.imbalance = {10.0, ImbalanceProfile::step, {2, 3}};
  const auto p = prepare(spec);
  CHECK(p.minor_classes == std::vector<std::size_t>{2, 3});
  const auto te = p.test.class_counts();
  CHECK(te[0] == te[3]);
  const auto tr = p.train.class_counts();
  CHECK(tr[0] == 70);
  CHECK(tr[2] == 7);

  spec.imbalance = {4.0, ImbalanceProfile::exponential, {}};
  const auto e = prepare(spec);
  CHECK(e.minor_classes == std::vector<std::size_t>{1, 2, 3});

  spec.imbalance = {};
  CHECK(prepare(spec).minor_classes.empty());
  CHECK(prepare(spec).train == prepare(spec).train);
}

TEST_CASE("spec validation") {
  DatasetSpec s;
  s.test_fraction = 1.0;
  CHECK_THROWS_AS(s.validate(), InputError);
  s.test_fraction = 0.3;
  s.imbalance.ratio = 0.5;
  CHECK_THROWS_AS(s.validate(), InputError);
  s.imbalance.ratio = 1.0;
  s.n_classes = 1;
  CHECK_THROWS_AS(s.validate(), InputError);
}
