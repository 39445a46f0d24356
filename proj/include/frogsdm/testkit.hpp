#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "frogsdm/balance.hpp"
#include "frogsdm/covariates.hpp"
#include "frogsdm/csv.hpp"
#include "frogsdm/geo.hpp"
#include "frogsdm/occurrence.hpp"
#include "frogsdm/raster.hpp"
#include "frogsdm/rng.hpp"

namespace frogsdm {

// --- Synthetic world -----------------------------------------------------

struct WorldConfig {
  BoundingBox bbox = {-0.5, 0.0, 0.5, 1.0};
  GridSpec grid_spec;
  int n_landcover = 5;
  double lambda = 6.0;                    // Poisson rate scale
  double beta0 = 0.0;                     // suitability intercept
  std::vector<double> beta = {1.5, -1.0, 0.8, 0, 0, 0, 0, 0, 0, 0};
  double landcover_effect = 0.0;          // suitability shift, linear in class id
  std::array<double, 3> country_boost = {0.0, 0.0, 0.0};  // suitability shift per country
  double survey_fraction = 1.0;           // share of cells that can record sightings
  int patch_size = 8;
  int field_components = 4;               // waves per smooth covariate field
  int effort_components = 0;              // waves in the survey-effort field; 0 follows field_components
  std::string species = "anura_sp";
};

struct SyntheticWorld {
  WorldConfig cfg;
  std::uint64_t seed = 0;
  Grid grid;
  std::vector<std::string> feature_names;
  std::vector<CovariateVector> covariates;  // per cell, row-major
  std::vector<int> landcover;
  std::vector<Country> country;
  std::vector<double> suitability;
  std::vector<bool> surveyed;
  std::vector<long> potential_count;  // counterfactual draw, ignores the survey mask
  std::vector<long> true_count;       // potential_count where surveyed, else 0
  std::vector<OccurrenceRecord> records;

  std::size_t cell_index(int row, int col) const {
    return static_cast<std::size_t>(row) * grid.n_cols + col;
  }
};

namespace detail {

// Sum of a few random plane waves over normalized grid coordinates, then
// z-scored across cells.
inline std::vector<double> smooth_field(const Grid& grid, const BoundingBox& bbox,
                                        int components, Rng& rng) {
  struct Wave {
    double amp, fu, fv, phase;
  };
  std::vector<Wave> waves;
  for (int i = 0; i < components; ++i)
    waves.push_back({rng.uniform(0.5, 1.0), rng.uniform(0.3, 2.5), rng.uniform(0.3, 2.5),
                     rng.uniform(0.0, 2.0 * std::numbers::pi)});
  const double lat_span = bbox.max_lat - bbox.min_lat;
  const double lon_span = bbox.max_lon - bbox.min_lon;
  std::vector<double> field(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const GeoPoint c = grid.cells[i].centroid;
    const double u = (c.lon - bbox.min_lon) / lon_span;
    const double v = (c.lat - bbox.min_lat) / lat_span;
    double s = 0.0;
    for (const Wave& w : waves)
      s += w.amp * std::sin(2.0 * std::numbers::pi * (w.fu * u + w.fv * v) + w.phase);
    field[i] = s;
  }
  double mean = 0.0;
  for (double x : field) mean += x;
  mean /= static_cast<double>(field.size());
  double var = 0.0;
  for (double x : field) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(field.size()));
  for (double& x : field) x = sd > 0.0 ? (x - mean) / sd : 0.0;
  return field;
}

inline std::vector<int> quantile_bins(const std::vector<double>& field, int n_bins) {
  std::vector<std::size_t> order(field.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return field[a] < field[b] || (field[a] == field[b] && a < b);
  });
  std::vector<int> bins(field.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    bins[order[rank]] = std::min<int>(n_bins - 1, static_cast<int>(rank * n_bins / order.size()));
  return bins;
}

}  // namespace detail

// Countries are longitude bands with deliberately unequal shares.
inline Country country_of_lon(double lon, const BoundingBox& bbox) {
  const double frac = (lon - bbox.min_lon) / (bbox.max_lon - bbox.min_lon);
  if (frac < 0.82) return Country::AU;
  if (frac < 0.93) return Country::SA;
  return Country::CR;
}

inline SyntheticWorld generate_world(const WorldConfig& cfg, std::uint64_t seed) {
  if (cfg.n_landcover < 1 || cfg.n_landcover > kLandcoverClasses)
    throw std::invalid_argument("world: n_landcover must be in [1, 10]");
  if (!(cfg.survey_fraction > 0.0 && cfg.survey_fraction <= 1.0))
    throw std::invalid_argument("world: survey_fraction must be in (0, 1]");
  if (cfg.lambda < 0.0) throw std::invalid_argument("world: lambda must be >= 0");

  SyntheticWorld world;
  world.cfg = cfg;
  world.seed = seed;
  world.grid = make_grid(cfg.bbox, cfg.grid_spec);
  world.feature_names = climate_feature_names();
  const std::size_t n = world.grid.size();

  Rng rng(seed);
  Rng field_rng = rng.fork(1);
  std::vector<std::vector<double>> fields;
  for (std::size_t f = 0; f < world.feature_names.size(); ++f)
    fields.push_back(detail::smooth_field(world.grid, cfg.bbox, cfg.field_components, field_rng));

  world.covariates.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    world.covariates[i].values.resize(fields.size());
    for (std::size_t f = 0; f < fields.size(); ++f) world.covariates[i].values[f] = fields[f][i];
  }

  Rng lc_rng = rng.fork(2);
  world.landcover =
      detail::quantile_bins(detail::smooth_field(world.grid, cfg.bbox, cfg.field_components, lc_rng),
                            cfg.n_landcover);

  world.country.resize(n);
  world.suitability.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    world.country[i] = country_of_lon(world.grid.cells[i].centroid.lon, cfg.bbox);
    double z = cfg.beta0;
    for (std::size_t f = 0; f < fields.size() && f < cfg.beta.size(); ++f)
      z += cfg.beta[f] * world.covariates[i].values[f];
    if (cfg.landcover_effect != 0.0 && cfg.n_landcover > 1)
      z += cfg.landcover_effect *
           (2.0 * world.landcover[i] / static_cast<double>(cfg.n_landcover - 1) - 1.0);
    z += cfg.country_boost[static_cast<int>(world.country[i])];
    world.suitability[i] = 1.0 / (1.0 + std::exp(-z));
  }

  world.surveyed.assign(n, true);
  if (cfg.survey_fraction < 1.0) {
    Rng effort_rng = rng.fork(3);
    const int effort_waves = cfg.effort_components > 0 ? cfg.effort_components : cfg.field_components;
    const std::vector<double> effort =
        detail::smooth_field(world.grid, cfg.bbox, effort_waves, effort_rng);
    std::vector<double> sorted = effort;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t cut = static_cast<std::size_t>(
        std::llround((1.0 - cfg.survey_fraction) * static_cast<double>(n)));
    const double threshold = sorted[std::min(cut, n - 1)];
    for (std::size_t i = 0; i < n; ++i) world.surveyed[i] = effort[i] >= threshold;
  }

  Rng count_rng = rng.fork(4);
  Rng jitter_rng = rng.fork(5);
  world.potential_count.assign(n, 0);
  world.true_count.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    world.potential_count[i] = count_rng.poisson(cfg.lambda * world.suitability[i]);
  for (std::size_t i = 0; i < n; ++i) {
    if (!world.surveyed[i]) continue;
    world.true_count[i] = world.potential_count[i];
    const GridCell& cell = world.grid.cells[i];
    for (long k = 0; k < world.true_count[i]; ++k) {
      OccurrenceRecord rec;
      rec.species = cfg.species;
      rec.location = {
          cell.bbox.min_lat + jitter_rng.uniform() * (cell.bbox.max_lat - cell.bbox.min_lat),
          cell.bbox.min_lon + jitter_rng.uniform() * (cell.bbox.max_lon - cell.bbox.min_lon)};
      rec.timestamp = "2023-01-01T00:00:00Z";
      rec.country = world.country[i];
      world.records.push_back(std::move(rec));
    }
  }
  return world;
}

// Per-cell patches: a 4-band reflectance patch feeds the RGB and NDVI
// modalities, the landcover patch is the cell's class everywhere.
inline std::map<Modality, RasterPatch> world_patches(const SyntheticWorld& world, int row,
                                                     int col) {
  const std::size_t i = world.cell_index(row, col);
  std::uint64_t stream = world.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1));
  Rng rng(splitmix64(stream));
  const int ps = world.cfg.patch_size;
  const double x0 = world.covariates[i].values.empty() ? 0.0 : world.covariates[i].values[0];
  const double x1 = world.covariates[i].values.size() > 1 ? world.covariates[i].values[1] : 0.0;

  RasterPatch raw = make_patch(ps, ps, {"red", "green", "blue", "nir"});
  for (int r = 0; r < ps; ++r) {
    for (int c = 0; c < ps; ++c) {
      const double noise = rng.normal() * 0.02;
      const auto px = [&](double base) {
        return static_cast<float>(std::clamp(base + noise, 0.0, 1.0));
      };
      raw.at(0, r, c) = px(0.45 - 0.10 * x0);
      raw.at(1, r, c) = px(0.50 + 0.05 * x1);
      raw.at(2, r, c) = px(0.40 - 0.05 * x1);
      raw.at(3, r, c) = px(0.55 + 0.15 * x0);
    }
  }

  std::map<Modality, RasterPatch> out;
  RasterPatch rgb = make_patch(ps, ps, {"red", "green", "blue"});
  for (int b = 0; b < 3; ++b) rgb.bands[b].pixels = raw.bands[b].pixels;
  out[Modality::RGB] = std::move(rgb);
  out[Modality::NDVI] = ndvi(raw);

  RasterPatch lc = make_patch(ps, ps, {"landcover"});
  std::fill(lc.bands[0].pixels.begin(), lc.bands[0].pixels.end(),
            static_cast<float>(world.landcover[i]));
  out[Modality::LC] = std::move(lc);
  return out;
}

inline void write_covariates_csv(const SyntheticWorld& world, const std::filesystem::path& path) {
  std::vector<std::string> header = {"row", "col"};
  header.insert(header.end(), world.feature_names.begin(), world.feature_names.end());
  CsvWriter out(path, header);
  for (std::size_t i = 0; i < world.grid.size(); ++i) {
    const GridCell& cell = world.grid.cells[i];
    std::vector<std::string> row = {std::to_string(cell.row), std::to_string(cell.col)};
    for (double v : world.covariates[i].values) row.push_back(fmt_double(v));
    out.row(row);
  }
}

inline void write_landcover_csv(const SyntheticWorld& world, const std::filesystem::path& path) {
  CsvWriter out(path, {"row", "col", "landcover_class"});
  for (std::size_t i = 0; i < world.grid.size(); ++i)
    out.row({std::to_string(world.grid.cells[i].row), std::to_string(world.grid.cells[i].col),
             std::to_string(world.landcover[i])});
}

inline void write_truth_csv(const SyntheticWorld& world, const std::filesystem::path& path) {
  CsvWriter out(path, {"row", "col", "country", "suitability", "true_count", "surveyed"});
  for (std::size_t i = 0; i < world.grid.size(); ++i)
    out.row({std::to_string(world.grid.cells[i].row), std::to_string(world.grid.cells[i].col),
             country_name(world.country[i]), fmt_double(world.suitability[i]),
             std::to_string(world.true_count[i]), world.surveyed[i] ? "1" : "0"});
}

inline std::string patch_filename(int row, int col, Modality m) {
  return "cell_" + std::to_string(row) + "_" + std::to_string(col) + "_" + modality_name(m) +
         ".bin";
}

inline void write_world(const SyntheticWorld& world, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "patches");
  write_grid_csv(world.grid, dir / "grid.csv");
  write_occurrences_csv(world.records, dir / "occurrences.csv");
  write_covariates_csv(world, dir / "covariates.csv");
  write_landcover_csv(world, dir / "landcover.csv");
  write_truth_csv(world, dir / "truth.csv");
  for (const GridCell& cell : world.grid.cells)
    for (const auto& [modality, patch] : world_patches(world, cell.row, cell.col))
      write_patch(patch, dir / "patches" / patch_filename(cell.row, cell.col, modality));
}

// --- Oracles -------------------------------------------------------------

struct SimplexGridResult {
  std::array<double, 3> weights = {0, 0, 0};
  double mae = 0.0;
  std::size_t points_evaluated = 0;
};

// Exhaustive search over the simplex lattice with the given step.
inline SimplexGridResult oracle_simplex_grid(const std::vector<std::array<double, 3>>& preds,
                                             const std::vector<double>& truth, double step) {
  if (preds.empty() || preds.size() != truth.size())
    throw std::invalid_argument("oracle: bad input sizes");
  const long m = std::lround(1.0 / step);
  if (m < 1 || std::abs(m * step - 1.0) > 1e-9)
    throw std::invalid_argument("oracle: step must divide 1");
  SimplexGridResult best;
  best.mae = std::numeric_limits<double>::infinity();
  for (long i = 0; i <= m; ++i) {
    for (long j = 0; j <= m - i; ++j) {
      const long k = m - i - j;
      const std::array<double, 3> w = {static_cast<double>(i) / m, static_cast<double>(j) / m,
                                       static_cast<double>(k) / m};
      double total = 0.0;
      for (std::size_t s = 0; s < preds.size(); ++s)
        total += std::abs(w[0] * preds[s][0] + w[1] * preds[s][1] + w[2] * preds[s][2] - truth[s]);
      const double mae = total / static_cast<double>(preds.size());
      ++best.points_evaluated;
      if (mae < best.mae) {
        best.mae = mae;
        best.weights = w;
      }
    }
  }
  return best;
}

// Central finite differences of f at params; f must not retain the pointer.
template <typename F>
std::vector<double> numeric_gradient(F&& f, std::vector<double>& params, double h = 1e-5) {
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double hi = f();
    params[i] = saved - h;
    const double lo = f();
    params[i] = saved;
    grad[i] = (hi - lo) / (2.0 * h);
  }
  return grad;
}

// Worst relative disagreement; tiny absolute differences pass unconditionally.
inline double max_rel_error(const std::vector<double>& analytic,
                            const std::vector<double>& numeric, double atol = 1e-8) {
  if (analytic.size() != numeric.size())
    throw std::invalid_argument("max_rel_error: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double diff = std::abs(analytic[i] - numeric[i]);
    if (diff < atol) continue;
    worst = std::max(worst, diff / std::max({std::abs(analytic[i]), std::abs(numeric[i]), atol}));
  }
  return worst;
}

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    const std::uint64_t pid = static_cast<std::uint64_t>(::getpid());
    path_ = std::filesystem::temp_directory_path() /
            ("frogsdm_" + tag + "_" + std::to_string(pid) + "_" + std::to_string(++counter));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace frogsdm
