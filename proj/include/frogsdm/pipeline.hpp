#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "frogsdm/balance.hpp"
#include "frogsdm/config.hpp"
#include "frogsdm/csv.hpp"
#include "frogsdm/fusion.hpp"
#include "frogsdm/geo.hpp"
#include "frogsdm/occurrence.hpp"
#include "frogsdm/pseudoabsence.hpp"
#include "frogsdm/raster.hpp"
#include "frogsdm/testkit.hpp"
#include "frogsdm/version.hpp"

namespace frogsdm {

// --- Artifact readers ----------------------------------------------------

inline Grid read_grid_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t c_row = table.column("row"), c_col = table.column("col");
  const std::size_t c_min_lat = table.column("min_lat"), c_min_lon = table.column("min_lon");
  const std::size_t c_max_lat = table.column("max_lat"), c_max_lon = table.column("max_lon");
  const std::size_t c_cen_lat = table.column("centroid_lat"), c_cen_lon = table.column("centroid_lon");
  if (table.rows.empty()) throw std::runtime_error("grid file " + path.string() + " is empty");

  Grid grid;
  grid.n_rows = 0;
  grid.n_cols = 0;
  for (const auto& row : table.rows) {
    GridCell cell;
    cell.row = static_cast<int>(parse_long(row[c_row]));
    cell.col = static_cast<int>(parse_long(row[c_col]));
    cell.bbox = {parse_double(row[c_min_lat]), parse_double(row[c_min_lon]),
                 parse_double(row[c_max_lat]), parse_double(row[c_max_lon])};
    cell.centroid = {parse_double(row[c_cen_lat]), parse_double(row[c_cen_lon])};
    grid.n_rows = std::max(grid.n_rows, cell.row + 1);
    grid.n_cols = std::max(grid.n_cols, cell.col + 1);
    grid.cells.push_back(cell);
  }
  if (grid.cells.size() != static_cast<std::size_t>(grid.n_rows) * grid.n_cols)
    throw std::runtime_error("grid file " + path.string() + " is not a full row-major grid");
  std::sort(grid.cells.begin(), grid.cells.end(), [](const GridCell& a, const GridCell& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  grid.bbox = {grid.cells.front().bbox.min_lat, grid.cells.front().bbox.min_lon,
               grid.cells.back().bbox.max_lat, grid.cells.back().bbox.max_lon};
  // Cell (0,0) is never clipped, so its extent is the grid step.
  grid.lat_step_deg = grid.cells.front().bbox.max_lat - grid.cells.front().bbox.min_lat;
  grid.lon_step_deg = grid.cells.front().bbox.max_lon - grid.cells.front().bbox.min_lon;
  return grid;
}

struct CovariateTable {
  std::vector<std::string> feature_names;
  std::map<std::pair<int, int>, CovariateVector> by_cell;
};

inline CovariateTable read_covariates_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t c_row = table.column("row"), c_col = table.column("col");
  CovariateTable out;
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j == c_row || j == c_col) continue;
    out.feature_names.push_back(table.header[j]);
    feature_cols.push_back(j);
  }
  for (const auto& row : table.rows) {
    CovariateVector v;
    v.values.reserve(feature_cols.size());
    for (std::size_t j : feature_cols) v.values.push_back(parse_double(row[j]));
    out.by_cell[{static_cast<int>(parse_long(row[c_row])),
                 static_cast<int>(parse_long(row[c_col]))}] = std::move(v);
  }
  return out;
}

inline LandcoverMap read_landcover_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t c_row = table.column("row"), c_col = table.column("col");
  const std::size_t c_class = table.column("landcover_class");
  LandcoverMap out;
  for (const auto& row : table.rows)
    out[{static_cast<int>(parse_long(row[c_row])), static_cast<int>(parse_long(row[c_col]))}] =
        static_cast<int>(parse_long(row[c_class]));
  return out;
}

// Landcover classes derived from the per-cell patches themselves.
inline LandcoverMap landcover_from_patches(const Grid& grid,
                                           const std::filesystem::path& patches_dir) {
  LandcoverMap out;
  for (const GridCell& cell : grid.cells) {
    const auto file = patches_dir / patch_filename(cell.row, cell.col, Modality::LC);
    if (!std::filesystem::exists(file)) continue;
    out[{cell.row, cell.col}] = dominant_landcover(read_patch(file));
  }
  return out;
}

// --- Dataset assembly ----------------------------------------------------

struct WorldTables {
  Grid grid;
  CovariateTable covariates;
  LandcoverMap landcover;
  std::filesystem::path patches_dir;
};

inline WorldTables load_world_tables(const std::filesystem::path& dir) {
  WorldTables t;
  t.grid = read_grid_csv(dir / "grid.csv");
  t.covariates = read_covariates_csv(dir / "covariates.csv");
  t.landcover = read_landcover_csv(dir / "landcover.csv");
  t.patches_dir = dir / "patches";
  return t;
}

inline int modality_bands(Modality m) { return m == Modality::RGB ? 3 : 1; }

inline FusionSample make_fusion_sample(const WorldTables& tables, const CellSample& cell,
                                       Modality modality, const FusionConfig& cfg) {
  const auto cov = tables.covariates.by_cell.find({cell.cell.row, cell.cell.col});
  if (cov == tables.covariates.by_cell.end())
    throw std::runtime_error("no covariates for cell (" + std::to_string(cell.cell.row) + "," +
                             std::to_string(cell.cell.col) + ")");
  const auto file =
      tables.patches_dir / patch_filename(cell.cell.row, cell.cell.col, modality);
  RasterPatch patch = read_patch(file);
  if (patch.height != cfg.image_height || patch.width != cfg.image_width)
    patch = resize_patch(patch, cfg.image_height, cfg.image_width);

  FusionSample s;
  s.image = patch_to_input(patch, cfg);
  s.covariates = cov->second.values;
  s.target = cfg.task == Task::Classification ? (cell.label_presence ? 1.0 : 0.0)
                                              : static_cast<double>(cell.count);
  s.country = cell.country;
  return s;
}

inline std::vector<FusionSample> make_fusion_samples(const WorldTables& tables,
                                                     const std::vector<CellSample>& cells,
                                                     Modality modality, const FusionConfig& cfg) {
  std::vector<FusionSample> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(make_fusion_sample(tables, c, modality, cfg));
  return out;
}

// --- Config mapping ------------------------------------------------------

inline GridSpec grid_spec_from(const ConfigFile& cfg) {
  GridSpec spec;
  spec.cell_area_km2 = cfg.get_double("grid.cell_area_km2", 30.0);
  return spec;
}

inline BoundingBox bbox_from(const ConfigFile& cfg) {
  BoundingBox bbox{cfg.get_double("grid.min_lat"), cfg.get_double("grid.min_lon"),
                   cfg.get_double("grid.max_lat"), cfg.get_double("grid.max_lon")};
  validate_bbox(bbox);
  return bbox;
}

inline PseudoAbsenceConfig pseudoabsence_config_from(const ConfigFile& cfg, std::uint64_t seed) {
  PseudoAbsenceConfig pa;
  pa.thresholds_km[Country::AU] = cfg.get_double("pseudoabsence.threshold_au_km", 10.0);
  pa.thresholds_km[Country::SA] = cfg.get_double("pseudoabsence.threshold_sa_km", 20.0);
  pa.thresholds_km[Country::CR] = cfg.get_double("pseudoabsence.threshold_cr_km", 28.0);
  pa.ratio = cfg.get_double("pseudoabsence.ratio", 1.0);
  pa.seed = seed;
  return pa;
}

inline OversampleConfig oversample_config_from(const ConfigFile& cfg, std::uint64_t seed) {
  OversampleConfig os;
  os.n_clusters = static_cast<int>(cfg.get_long("balance.n_clusters", 8));
  os.target_per_bin = cfg.get_long("balance.target_per_bin", 0);
  const std::vector<long> edges = cfg.get_long_list("balance.bin_edges", {1, 10, 40, 100});
  if (edges.size() < 2) throw std::runtime_error("config key 'balance.bin_edges' needs >= 2 values");
  os.count_bins.clear();
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    os.count_bins.push_back({i == 0 ? edges[0] : edges[i] + 1, edges[i + 1]});
  os.count_bins.push_back({edges.back() + 1, std::numeric_limits<long>::max()});
  os.seed = seed;
  return os;
}

inline FusionConfig fusion_config_from(const ConfigFile& cfg, Modality modality, Task task,
                                       int n_covariates, std::uint64_t seed) {
  FusionConfig fc;
  fc.image_height = static_cast<int>(cfg.get_long("fusion.image_size", 8));
  fc.image_width = fc.image_height;
  fc.image_bands = modality_bands(modality);
  const std::vector<long> channels = cfg.get_long_list("fusion.conv_channels", {4});
  const std::vector<long> kernels = cfg.get_long_list("fusion.conv_kernels", {3});
  if (channels.size() != kernels.size())
    throw std::runtime_error("config: fusion.conv_channels and fusion.conv_kernels differ in length");
  fc.conv_layers.clear();
  for (std::size_t i = 0; i < channels.size(); ++i)
    fc.conv_layers.push_back({static_cast<int>(channels[i]), static_cast<int>(kernels[i])});
  fc.image_features = static_cast<int>(cfg.get_long("fusion.image_features", 8));
  fc.tabular_layers.clear();
  for (long v : cfg.get_long_list("fusion.tabular_layers", {8}))
    fc.tabular_layers.push_back(static_cast<int>(v));
  fc.n_covariates = n_covariates;
  fc.task = task;
  fc.l2_lambda = cfg.get_double("fusion.l2_lambda", 0.0);
  fc.seed = seed;
  return fc;
}

inline TrainConfig train_config_from(const ConfigFile& cfg, std::uint64_t seed) {
  TrainConfig tc;
  tc.lr_init = cfg.get_double("train.lr_init", 1e-3);
  tc.lr_target = cfg.get_double("train.lr_target", 1e-2);
  tc.warmup_steps = static_cast<int>(cfg.get_long("train.warmup_steps", 100));
  tc.adam_beta1 = cfg.get_double("train.adam_beta1", 0.9);
  tc.adam_beta2 = cfg.get_double("train.adam_beta2", 0.999);
  tc.adam_eps = cfg.get_double("train.adam_eps", 1e-8);
  tc.epochs = static_cast<int>(cfg.get_long("train.epochs", 30));
  tc.batch_size = static_cast<int>(cfg.get_long("train.batch_size", 32));
  tc.seed = seed;
  return tc;
}

inline std::vector<double> double_list_from(const ConfigFile& cfg, const std::string& key) {
  std::vector<double> out;
  std::istringstream ss(cfg.get_string(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos)
      throw std::runtime_error("config key '" + key + "': empty list item");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(parse_double(item.substr(b, e - b + 1)));
  }
  return out;
}

inline WorldConfig world_config_from(const ConfigFile& cfg) {
  WorldConfig wc;
  wc.bbox = {cfg.get_double("grid.min_lat", -0.5), cfg.get_double("grid.min_lon", 0.0),
             cfg.get_double("grid.max_lat", 0.5), cfg.get_double("grid.max_lon", 1.0)};
  validate_bbox(wc.bbox);
  wc.grid_spec.cell_area_km2 = cfg.get_double("grid.cell_area_km2", 30.0);
  wc.n_landcover = static_cast<int>(cfg.get_long("synth.n_landcover", 5));
  wc.lambda = cfg.get_double("synth.lambda", 6.0);
  wc.beta0 = cfg.get_double("synth.beta0", 0.0);
  wc.landcover_effect = cfg.get_double("synth.landcover_effect", 0.0);
  wc.survey_fraction = cfg.get_double("synth.survey_fraction", 1.0);
  wc.patch_size = static_cast<int>(cfg.get_long("synth.patch_size", 8));
  wc.field_components = static_cast<int>(cfg.get_long("synth.field_components", 4));
  if (cfg.has("synth.beta")) wc.beta = double_list_from(cfg, "synth.beta");
  if (cfg.has("synth.country_boost")) {
    const std::vector<double> boosts = double_list_from(cfg, "synth.country_boost");
    if (boosts.size() != wc.country_boost.size())
      throw std::runtime_error("config key 'synth.country_boost': expected 3 values (AU, SA, CR)");
    std::copy(boosts.begin(), boosts.end(), wc.country_boost.begin());
  }
  return wc;
}

// --- Run manifests ---------------------------------------------------------

inline std::string hex_u64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// Deterministic by construction: sorted keys, content hashes, no timestamps.
inline void write_manifest(const std::filesystem::path& path, const std::string& command,
                           const ConfigFile& cfg, std::uint64_t seed,
                           const std::vector<std::filesystem::path>& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = hex_u64(cfg.hash());
  j["seed"] = seed;
  j["version"] = kVersion;
  nlohmann::json files = nlohmann::json::object();
  for (const auto& p : outputs) files[p.filename().string()] = hex_u64(fnv1a_hash_file(p));
  j["outputs"] = files;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace frogsdm
