#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "frogsdm/featsel.hpp"
#include "frogsdm/rng.hpp"
#include "frogsdm/testkit.hpp"

using namespace frogsdm;

namespace {

// y depends strongly on feature 0, weakly on feature 1; the rest is noise
struct Problem {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  std::vector<std::string> names{"signal", "weak", "noise_a", "noise_b"};
};

Problem make_problem(int n, std::uint64_t seed) {
  Problem p;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    std::vector<double> row = {rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0),
                               rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
    p.y.push_back(5.0 * row[0] + 0.5 * row[1] + rng.normal(0.0, 0.2));
    p.X.push_back(std::move(row));
  }
  return p;
}

}  // namespace

TEST_CASE("a deep tree memorizes a step function") {
  // single feature, exact step at 5: one split suffices
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i < 20; ++i) {
    X.push_back({static_cast<double>(i)});
    y.push_back(i < 10 ? 1.0 : 9.0);
  }
  ForestConfig cfg;
  cfg.n_trees = 1;
  cfg.bootstrap_fraction = 1.0;
  cfg.max_depth = 3;
  cfg.features_per_split = 1;
  cfg.seed = 4;
  const RandomForest f = fit_random_forest(X, y, cfg);

  // bootstrap resamples, so test only where the answer is unambiguous
  CHECK_THAT(f.predict({2.0}), Catch::Matchers::WithinAbs(1.0, 1e-9));
  CHECK_THAT(f.predict({15.0}), Catch::Matchers::WithinAbs(9.0, 1e-9));
  CHECK(f.importance[0] == 1.0);
}

TEST_CASE("forest importance concentrates on the informative feature") {
  const Problem p = make_problem(200, 9);
  ForestConfig cfg;
  cfg.n_trees = 30;
  cfg.max_depth = 6;
  cfg.seed = 1;
  const RandomForest f = fit_random_forest(p.X, p.y, cfg);

  REQUIRE(f.importance.size() == 4);
  double sum = 0.0;
  for (double v : f.importance) {
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-9));
  CHECK(f.importance[0] > 0.5);
  CHECK(f.importance[0] > f.importance[2]);
  CHECK(f.importance[0] > f.importance[3]);

  // prediction quality: far better than predicting the mean
  double mean = 0.0;
  for (double v : p.y) mean += v;
  mean /= static_cast<double>(p.y.size());
  double err_forest = 0.0, err_mean = 0.0;
  for (std::size_t i = 0; i < p.X.size(); ++i) {
    err_forest += std::abs(f.predict(p.X[i]) - p.y[i]);
    err_mean += std::abs(mean - p.y[i]);
  }
  CHECK(err_forest < 0.3 * err_mean);
}

TEST_CASE("forest training is deterministic per seed") {
  const Problem p = make_problem(80, 2);
  ForestConfig cfg;
  cfg.n_trees = 10;
  cfg.seed = 33;
  const RandomForest a = fit_random_forest(p.X, p.y, cfg);
  const RandomForest b = fit_random_forest(p.X, p.y, cfg);
  CHECK(a.importance == b.importance);
  CHECK(a.predict(p.X[0]) == b.predict(p.X[0]));

  cfg.seed = 34;
  const RandomForest c = fit_random_forest(p.X, p.y, cfg);
  CHECK(a.predict(p.X[0]) != c.predict(p.X[0]));
}

TEST_CASE("constant targets give zero importance and constant predictions") {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  Rng rng(6);
  for (int i = 0; i < 30; ++i) {
    X.push_back({rng.uniform(), rng.uniform()});
    y.push_back(7.5);
  }
  ForestConfig cfg;
  cfg.n_trees = 5;
  const RandomForest f = fit_random_forest(X, y, cfg);
  for (double v : f.importance) CHECK(v == 0.0);
  CHECK_THAT(f.predict({0.5, 0.5}), Catch::Matchers::WithinAbs(7.5, 1e-12));
}

TEST_CASE("forest validates inputs") {
  ForestConfig cfg;
  CHECK_THROWS(fit_random_forest({}, {}, cfg));
  CHECK_THROWS(fit_random_forest({{1.0}}, {1.0, 2.0}, cfg));
  cfg.n_trees = 0;
  CHECK_THROWS(fit_random_forest({{1.0}, {2.0}}, {1.0, 2.0}, cfg));
  cfg = ForestConfig{};
  cfg.bootstrap_fraction = 0.0;
  CHECK_THROWS(fit_random_forest({{1.0}, {2.0}}, {1.0, 2.0}, cfg));
}

TEST_CASE("rfe eliminates noise features before signal") {
  const Problem p = make_problem(150, 21);
  ForestConfig cfg;
  cfg.n_trees = 20;
  cfg.max_depth = 6;
  cfg.seed = 8;
  const RfeReport report = rfe(p.X, p.y, p.names, 2, cfg);

  REQUIRE(report.ranking.size() == 2);
  REQUIRE(report.eliminated_order.size() == 2);
  CHECK(report.ranking[0].feature == "signal");
  // the strong feature is never eliminated
  for (const auto& name : report.eliminated_order) CHECK(name != "signal");
  // retained indices point back into the original feature list
  REQUIRE(report.retained_indices.size() == 2);
  CHECK(report.retained_indices[0] == 0);
  // descending importance in the ranking
  CHECK(report.ranking[0].importance >= report.ranking[1].importance);
}

TEST_CASE("rfe keep equal to feature count only ranks") {
  const Problem p = make_problem(60, 3);
  ForestConfig cfg;
  cfg.n_trees = 10;
  const RfeReport report = rfe(p.X, p.y, p.names, 4, cfg);
  CHECK(report.ranking.size() == 4);
  CHECK(report.eliminated_order.empty());
  for (std::size_t i = 1; i < report.ranking.size(); ++i)
    CHECK(report.ranking[i - 1].importance >= report.ranking[i].importance);
}

TEST_CASE("rfe validates arguments") {
  const Problem p = make_problem(20, 4);
  ForestConfig cfg;
  CHECK_THROWS(rfe(p.X, p.y, p.names, 0, cfg));
  CHECK_THROWS(rfe(p.X, p.y, p.names, 5, cfg));
  CHECK_THROWS(rfe(p.X, p.y, {"a", "b"}, 1, cfg));
}

TEST_CASE("importance csv ranks from one") {
  const Problem p = make_problem(60, 5);
  ForestConfig cfg;
  cfg.n_trees = 10;
  const RfeReport report = rfe(p.X, p.y, p.names, 3, cfg);
  TempDir dir("featsel");
  const auto path = dir.path() / "imp.csv";
  write_importance_csv(report, path);
  const CsvTable t = read_csv(path);
  CHECK(t.header == std::vector<std::string>{"rank", "feature", "importance"});
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0][t.column("rank")] == "1");
  CHECK(t.rows[0][t.column("feature")] == report.ranking[0].feature);
}
