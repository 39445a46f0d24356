#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "frogsdm/balance.hpp"
#include "frogsdm/testkit.hpp"

using namespace frogsdm;

namespace {

CellSample sample_with(long count, Country country, std::vector<double> covs = {}) {
  CellSample s;
  s.count = count;
  s.country = country;
  s.covariates.values = std::move(covs);
  return s;
}

std::vector<CellSample> composition(std::size_t au, std::size_t sa, std::size_t cr) {
  std::vector<CellSample> out;
  for (std::size_t i = 0; i < au; ++i) out.push_back(sample_with(1, Country::AU));
  for (std::size_t i = 0; i < sa; ++i) out.push_back(sample_with(1, Country::SA));
  for (std::size_t i = 0; i < cr; ++i) out.push_back(sample_with(1, Country::CR));
  return out;
}

}  // namespace

TEST_CASE("class weights on the 82/11/7 composition") {
  const auto w = class_weights(composition(82, 11, 7));
  CHECK_THAT(w.at(Country::AU), Catch::Matchers::WithinAbs(3.6585365853658536, 1e-9));
  CHECK_THAT(w.at(Country::SA), Catch::Matchers::WithinAbs(27.272727272727273, 1e-9));
  CHECK_THAT(w.at(Country::CR), Catch::Matchers::WithinAbs(42.857142857142854, 1e-9));
}

TEST_CASE("every class satisfies count times weight equals total times classes") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto samples = composition(1 + rng.uniform_index(50), 1 + rng.uniform_index(50),
                                     1 + rng.uniform_index(50));
    std::map<Country, std::size_t> counts;
    for (const auto& s : samples) ++counts[s.country];
    const auto w = class_weights(samples);
    for (const auto& [country, n] : counts)
      CHECK_THAT(static_cast<double>(n) * w.at(country),
                 Catch::Matchers::WithinRel(static_cast<double>(samples.size()) * 3.0, 1e-12));
  }
}

TEST_CASE("balanced and single-class compositions") {
  const auto equal = class_weights(composition(5, 5, 5));
  for (const auto& [country, w] : equal) CHECK_THAT(w, Catch::Matchers::WithinAbs(9.0, 1e-12));
  const auto solo = class_weights(composition(7, 0, 0));
  CHECK(solo.size() == 1);
  CHECK(solo.at(Country::AU) == 1.0);
  CHECK_THROWS(class_weights({}));
}

TEST_CASE("kmeans separates two clear blobs") {
  Rng data(5);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 30; ++i) points.push_back({data.normal(0.0, 0.5), data.normal(0.0, 0.5)});
  for (int i = 0; i < 30; ++i) points.push_back({data.normal(10.0, 0.5), data.normal(10.0, 0.5)});

  Rng rng(2);
  const KMeansResult km = kmeans(points, 2, rng);
  REQUIRE(km.assignments.size() == 60);
  const int first = km.assignments[0];
  for (int i = 0; i < 30; ++i) CHECK(km.assignments[i] == first);
  for (int i = 30; i < 60; ++i) CHECK(km.assignments[i] == 1 - first);

  for (std::size_t i = 1; i < km.inertia_history.size(); ++i)
    CHECK(km.inertia_history[i] <= km.inertia_history[i - 1] + 1e-9);
}

TEST_CASE("kmeans edge cases") {
  std::vector<std::vector<double>> points = {{0.0}, {1.0}, {2.0}, {3.0}, {10.0}};
  Rng rng(1);
  const KMeansResult one = kmeans(points, 1, rng);
  CHECK_THAT(one.centroids[0][0], Catch::Matchers::WithinAbs(3.2, 1e-12));  // plain mean
  for (int a : one.assignments) CHECK(a == 0);

  Rng rng2(1);
  const KMeansResult all = kmeans(points, 5, rng2);
  CHECK(all.inertia_history.back() == 0.0);

  CHECK_THROWS(kmeans({}, 1, rng));
  CHECK_THROWS(kmeans(points, 0, rng));
  CHECK_THROWS(kmeans(points, 6, rng));
}

TEST_CASE("standardizer zeroes means, unit-scales columns, and guards constants") {
  std::vector<std::vector<double>> rows = {{1.0, 5.0}, {3.0, 5.0}, {5.0, 5.0}};
  Standardizer sc;
  sc.fit(rows);
  const auto out = sc.transform_all(rows);
  double mean0 = 0.0;
  for (const auto& r : out) mean0 += r[0];
  CHECK_THAT(mean0 / 3.0, Catch::Matchers::WithinAbs(0.0, 1e-12));
  double var0 = 0.0;
  for (const auto& r : out) var0 += r[0] * r[0];
  CHECK_THAT(var0 / 3.0, Catch::Matchers::WithinAbs(1.0, 1e-12));
  for (const auto& r : out) CHECK(r[1] == 0.0);  // constant column maps to zero
}

namespace {

// counts 1..6 fill the first bin; two mid cells and one large cell are minority
std::vector<CellSample> skewed_samples() {
  std::vector<CellSample> samples;
  for (long i = 0; i < 6; ++i)
    samples.push_back(sample_with(1 + i, Country::AU, {static_cast<double>(i), 0.5}));
  samples.push_back(sample_with(20, Country::AU, {10.0, 1.0}));
  samples.push_back(sample_with(30, Country::SA, {11.0, 1.5}));
  samples.push_back(sample_with(50, Country::CR, {20.0, 2.0}));
  return samples;
}

}  // namespace

TEST_CASE("adaptive oversample tops up minority bins toward the largest") {
  const auto samples = skewed_samples();
  OversampleConfig cfg;
  cfg.n_clusters = 2;
  cfg.seed = 3;
  const OversampleResult r = adaptive_oversample(samples, cfg);

  CHECK(r.bin_before == std::vector<std::size_t>{6, 2, 1, 0});
  // bin 1 can only double (2 originals), bin 2 likewise; empty bin 3 stays empty
  CHECK(r.bin_after == std::vector<std::size_t>{6, 4, 2, 0});
  CHECK(r.samples.size() == samples.size() + 3);

  // the input is a prefix of the output, untouched
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(r.samples[i].count == samples[i].count);
    CHECK(r.samples[i].origin == "original");
  }
  for (std::size_t i = samples.size(); i < r.samples.size(); ++i)
    CHECK(r.samples[i].origin == "oversampled");
}

TEST_CASE("no original is copied more than once") {
  const auto samples = skewed_samples();
  OversampleConfig cfg;
  cfg.n_clusters = 3;
  cfg.target_per_bin = 100;  // force maximum growth everywhere
  const OversampleResult r = adaptive_oversample(samples, cfg);
  CHECK(r.samples.size() <= 2 * samples.size());

  std::map<long, int> copies;  // counts are unique per sample here
  for (const auto& s : r.samples) ++copies[s.count];
  for (const auto& [count, n] : copies) CHECK(n <= 2);
}

TEST_CASE("oversample respects an explicit per-bin target") {
  const auto samples = skewed_samples();
  OversampleConfig cfg;
  cfg.n_clusters = 1;
  cfg.target_per_bin = 3;
  const OversampleResult r = adaptive_oversample(samples, cfg);
  // bin 0 already has 6 >= 3; bin 1 grows 2 -> 3; bin 2 grows 1 -> 2 (cap)
  CHECK(r.bin_after == std::vector<std::size_t>{6, 3, 2, 0});
}

TEST_CASE("oversample determinism and warnings") {
  const auto samples = skewed_samples();
  OversampleConfig cfg;
  cfg.n_clusters = 8;  // more than the 3 minority members
  cfg.seed = 9;
  const OversampleResult a = adaptive_oversample(samples, cfg);
  const OversampleResult b = adaptive_oversample(samples, cfg);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    CHECK(a.samples[i].count == b.samples[i].count);
  REQUIRE(!a.warnings.empty());
  CHECK(a.warnings[0].find("n_clusters reduced") != std::string::npos);
}

TEST_CASE("oversample validates input") {
  CHECK_THROWS(adaptive_oversample({}, OversampleConfig{}));

  OversampleConfig overlap;
  overlap.count_bins = {{1, 10}, {5, 20}};
  CHECK_THROWS(adaptive_oversample(skewed_samples(), overlap));

  OversampleConfig cfg;
  auto no_covs = skewed_samples();
  no_covs[7].covariates.values.clear();  // minority member without features
  CHECK_THROWS(adaptive_oversample(no_covs, cfg));

  OversampleConfig bad_k;
  bad_k.n_clusters = 0;
  CHECK_THROWS(adaptive_oversample(skewed_samples(), bad_k));
}

TEST_CASE("log transform pairs with its inverse") {
  CHECK(log_transform(0.0) == 0.0);
  CHECK_THAT(log_transform(std::exp(1.0) - 1.0), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THROWS(log_transform(-0.5));
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const double y = rng.uniform(0.0, 500.0);
    CHECK_THAT(inverse_log_transform(log_transform(y)), Catch::Matchers::WithinRel(y, 1e-12));
  }
  CHECK(inverse_log_transform(0.0) == 0.0);
}
