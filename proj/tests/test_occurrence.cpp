#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "frogsdm/occurrence.hpp"
#include "frogsdm/testkit.hpp"

using namespace frogsdm;

namespace {

const BoundingBox kBox{0.0, 0.0, 1.0, 1.0};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("country codes round-trip") {
  CHECK(country_name(Country::AU) == "AU");
  CHECK(parse_country("CR") == Country::CR);
  CHECK_THROWS(parse_country("NZ"));
}

TEST_CASE("occurrence loader keeps good rows and reports bad ones") {
  TempDir dir("occ");
  const auto path = dir.path() / "occ.csv";
  write_file(path,
             "species,lat,lon,timestamp,country\n"
             "anura_sp,0.5,0.5,2023-01-01T00:00:00Z,AU\n"
             "anura_sp,not_a_number,0.5,2023-01-01T00:00:00Z,AU\n"
             "anura_sp,0.25,0.75,2023-01-02T00:00:00Z,SA\n"
             "anura_sp,95.0,0.5,2023-01-01T00:00:00Z,AU\n"
             "anura_sp,0.1,0.1,2023-01-01T00:00:00Z,XX\n"
             "anura_sp,0.9,0.2,2023-01-03T00:00:00Z,CR\n");
  const LoadReport report = load_occurrences(path);  // 3 of 6 bad: within tolerance
  REQUIRE(report.records.size() == 3);
  CHECK(report.rejected_rows == std::vector<std::size_t>{2, 4, 5});
  CHECK(report.records[0].species == "anura_sp");
  CHECK(report.records[1].country == Country::SA);
  CHECK(report.records[1].location.lat == 0.25);
  CHECK(report.records[2].country == Country::CR);
}

TEST_CASE("occurrence loader rejects wrong headers and mostly-bad files") {
  TempDir dir("occ");
  const auto bad_header = dir.path() / "h.csv";
  write_file(bad_header, "lat,lon\n0.5,0.5\n");
  CHECK_THROWS(load_occurrences(bad_header));

  const auto mostly_bad = dir.path() / "b.csv";
  write_file(mostly_bad,
             "species,lat,lon,timestamp,country\n"
             "anura_sp,0.5,0.5,t,AU\n"
             "x,bad,bad,t,AU\n"
             "x,bad,bad,t,AU\n");
  CHECK_THROWS(load_occurrences(mostly_bad));
}

TEST_CASE("aggregation conserves record counts and tags by first record") {
  const Grid grid = make_grid(kBox, GridSpec{30.0});
  std::vector<OccurrenceRecord> records;
  const GeoPoint a = grid.at(3, 4).centroid;
  const GeoPoint b = grid.at(10, 2).centroid;
  records.push_back({"s", a, "t", Country::AU});
  records.push_back({"s", a, "t", Country::SA});  // same cell, later record
  records.push_back({"s", b, "t", Country::CR});
  records.push_back({"s", {5.0, 5.0}, "t", Country::AU});  // outside

  const AggregateResult agg = aggregate_counts(records, grid);
  REQUIRE(agg.samples.size() == 2);
  CHECK(agg.outside_count == 1);
  long total = 0;
  for (const auto& s : agg.samples) total += s.count;
  CHECK(total + static_cast<long>(agg.outside_count) == static_cast<long>(records.size()));

  // row-major order and first-record country
  CHECK(agg.samples[0].cell.row == 3);
  CHECK(agg.samples[0].count == 2);
  CHECK(agg.samples[0].country == Country::AU);
  CHECK(agg.samples[0].label_presence);
  CHECK(agg.samples[1].cell.row == 10);
}

TEST_CASE("train test split partitions the input") {
  const Grid grid = make_grid(kBox, GridSpec{30.0});
  std::vector<CellSample> samples;
  for (int i = 0; i < 10; ++i) {
    CellSample s;
    s.cell = grid.at(i, i);
    s.count = i + 1;
    samples.push_back(s);
  }
  const auto [train, test] = split_train_test(samples, 0.8, 7);
  CHECK(train.size() == 8);
  CHECK(test.size() == 2);
  std::multiset<long> seen;
  for (const auto& s : train) seen.insert(s.count);
  for (const auto& s : test) seen.insert(s.count);
  std::multiset<long> want;
  for (const auto& s : samples) want.insert(s.count);
  CHECK(seen == want);

  // deterministic per seed, different across seeds
  const auto [train2, test2] = split_train_test(samples, 0.8, 7);
  CHECK(train2[0].count == train[0].count);
  CHECK_THROWS(split_train_test(samples, 0.0, 7));
  CHECK_THROWS(split_train_test(samples, 1.0, 7));
  CHECK_THROWS(split_train_test({samples[0]}, 0.5, 7));
}

TEST_CASE("samples csv round-trips with and without origin") {
  const Grid grid = make_grid(kBox, GridSpec{30.0});
  std::vector<CellSample> samples(2);
  samples[0].cell = grid.at(1, 2);
  samples[0].count = 5;
  samples[0].country = Country::SA;
  samples[1].cell = grid.at(3, 3);
  samples[1].count = 1;
  samples[1].origin = "oversampled";

  TempDir dir("occ");
  const auto plain = dir.path() / "s.csv";
  write_samples_csv(samples, plain);
  const auto got = read_samples_csv(plain, grid);
  REQUIRE(got.size() == 2);
  CHECK(got[0].cell.row == 1);
  CHECK(got[0].cell.col == 2);
  CHECK(got[0].count == 5);
  CHECK(got[0].country == Country::SA);
  CHECK(got[0].label_presence);

  const auto tagged = dir.path() / "o.csv";
  write_samples_csv(samples, tagged, true);
  const CsvTable t = read_csv(tagged);
  CHECK(t.header.back() == "origin");
  CHECK(t.rows[1][t.column("origin")] == "oversampled");
  const auto got2 = read_samples_csv(tagged, grid);
  CHECK(got2[1].origin == "oversampled");
}

TEST_CASE("occurrences csv writer round-trips through the loader") {
  std::vector<OccurrenceRecord> records;
  records.push_back({"anura_sp", {0.25, 0.5}, "2023-06-01T00:00:00Z", Country::CR});
  TempDir dir("occ");
  const auto path = dir.path() / "w.csv";
  write_occurrences_csv(records, path);
  const LoadReport report = load_occurrences(path);
  REQUIRE(report.records.size() == 1);
  CHECK(report.records[0].location.lon == 0.5);
  CHECK(report.records[0].country == Country::CR);
  CHECK(report.records[0].timestamp == "2023-06-01T00:00:00Z");
}
