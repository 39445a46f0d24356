#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "frogsdm/covariates.hpp"
#include "frogsdm/csv.hpp"
#include "frogsdm/geo.hpp"
#include "frogsdm/raster.hpp"
#include "frogsdm/rng.hpp"

namespace frogsdm {

enum class Country { AU, SA, CR };

inline std::string country_name(Country c) {
  switch (c) {
    case Country::AU: return "AU";
    case Country::SA: return "SA";
    default: return "CR";
  }
}

inline Country parse_country(const std::string& s) {
  if (s == "AU") return Country::AU;
  if (s == "SA") return Country::SA;
  if (s == "CR") return Country::CR;
  throw std::invalid_argument("unknown country '" + s + "' (expected AU|SA|CR)");
}

struct OccurrenceRecord {
  std::string species;
  GeoPoint location;
  std::string timestamp;
  Country country = Country::AU;
};

struct CellSample {
  GridCell cell;
  long count = 0;
  Country country = Country::AU;
  CovariateVector covariates;
  std::map<Modality, RasterPatch> patches;
  bool label_presence = false;
  std::string origin = "original";
};

struct LoadReport {
  std::vector<OccurrenceRecord> records;
  std::vector<std::size_t> rejected_rows;  // 1-based data-row indices
};

// CSV schema: species,lat,lon,timestamp,country. Malformed rows are
// collected, not fatal, unless they are the majority of the file.
inline LoadReport load_occurrences(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::vector<std::string> expected = {"species", "lat", "lon", "timestamp", "country"};
  if (table.header != expected)
    throw std::runtime_error("occurrence file " + path.string() +
                             " has wrong header (expected species,lat,lon,timestamp,country)");
  LoadReport report;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    try {
      if (row.size() != 5) throw std::invalid_argument("wrong field count");
      OccurrenceRecord rec;
      rec.species = row[0];
      if (rec.species.empty()) throw std::invalid_argument("empty species");
      rec.location = {parse_double(row[1]), parse_double(row[2])};
      if (!is_valid(rec.location)) throw std::invalid_argument("coordinates out of range");
      rec.timestamp = row[3];
      rec.country = parse_country(row[4]);
      report.records.push_back(std::move(rec));
    } catch (const std::exception&) {
      report.rejected_rows.push_back(i + 1);
    }
  }
  if (!table.rows.empty() && report.rejected_rows.size() * 2 > table.rows.size())
    throw std::runtime_error("occurrence file " + path.string() + ": " +
                             std::to_string(report.rejected_rows.size()) + " of " +
                             std::to_string(table.rows.size()) + " rows malformed");
  return report;
}

struct AggregateResult {
  std::vector<CellSample> samples;  // presence cells only, row-major order
  std::size_t outside_count = 0;
};

// Count conservation: sum of cell counts + outside_count = |records|.
// A cell's country tag comes from the first record landing in it.
inline AggregateResult aggregate_counts(const std::vector<OccurrenceRecord>& records,
                                        const Grid& grid) {
  std::map<std::pair<int, int>, std::pair<long, Country>> counts;
  AggregateResult result;
  for (const auto& rec : records) {
    const GridCell* cell = cell_containing(grid, rec.location);
    if (!cell) {
      ++result.outside_count;
      continue;
    }
    auto [it, inserted] = counts.try_emplace({cell->row, cell->col}, 0L, rec.country);
    ++it->second.first;
  }
  for (const auto& [key, val] : counts) {
    CellSample s;
    s.cell = grid.at(key.first, key.second);
    s.count = val.first;
    s.country = val.second;
    s.label_presence = true;
    result.samples.push_back(std::move(s));
  }
  return result;
}

inline std::pair<std::vector<CellSample>, std::vector<CellSample>> split_train_test(
    const std::vector<CellSample>& samples, double ratio, std::uint64_t seed) {
  if (samples.size() < 2) throw std::invalid_argument("split: need at least 2 samples");
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split: ratio must be in (0,1)");
  std::vector<std::size_t> idx(samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(ratio * static_cast<double>(samples.size())));
  std::pair<std::vector<CellSample>, std::vector<CellSample>> out;
  for (std::size_t i = 0; i < idx.size(); ++i)
    (i < n_train ? out.first : out.second).push_back(samples[idx[i]]);
  return out;
}

inline void write_samples_csv(const std::vector<CellSample>& samples,
                              const std::filesystem::path& path, bool with_origin = false) {
  std::vector<std::string> header = {"row", "col", "country", "count"};
  if (with_origin) header.push_back("origin");
  CsvWriter out(path, header);
  for (const auto& s : samples) {
    std::vector<std::string> row = {std::to_string(s.cell.row), std::to_string(s.cell.col),
                                    country_name(s.country), std::to_string(s.count)};
    if (with_origin) row.push_back(s.origin);
    out.row(row);
  }
}

inline std::vector<CellSample> read_samples_csv(const std::filesystem::path& path,
                                                const Grid& grid) {
  const CsvTable table = read_csv(path);
  const std::size_t c_row = table.column("row");
  const std::size_t c_col = table.column("col");
  const std::size_t c_country = table.column("country");
  const std::size_t c_count = table.column("count");
  std::size_t c_origin = table.header.size();
  for (std::size_t j = 0; j < table.header.size(); ++j)
    if (table.header[j] == "origin") c_origin = j;
  std::vector<CellSample> samples;
  for (const auto& row : table.rows) {
    CellSample s;
    const int r = static_cast<int>(parse_long(row[c_row]));
    const int c = static_cast<int>(parse_long(row[c_col]));
    if (r < 0 || r >= grid.n_rows || c < 0 || c >= grid.n_cols)
      throw std::runtime_error("sample cell (" + row[c_row] + "," + row[c_col] +
                               ") is outside the grid");
    s.cell = grid.at(r, c);
    s.country = parse_country(row[c_country]);
    s.count = parse_long(row[c_count]);
    s.label_presence = s.count > 0;
    if (c_origin < table.header.size()) s.origin = row[c_origin];
    samples.push_back(std::move(s));
  }
  return samples;
}

inline void write_occurrences_csv(const std::vector<OccurrenceRecord>& records,
                                  const std::filesystem::path& path) {
  CsvWriter out(path, {"species", "lat", "lon", "timestamp", "country"});
  for (const auto& r : records)
    out.row({r.species, fmt_double(r.location.lat), fmt_double(r.location.lon), r.timestamp,
             country_name(r.country)});
}

}  // namespace frogsdm
