#include <array>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "frogsdm/frogsdm.hpp"

namespace fs = std::filesystem;
using namespace frogsdm;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::int64_t seed_override = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
  auto* c = cmd->add_option("--config", opts.config_path, "pipeline config file (key = value sections)");
  if (config_required) c->required();
  cmd->add_option("--out", opts.out_dir, "output directory")->required();
  cmd->add_option("--seed", opts.seed_override, "override the config seed");
}

ConfigFile load_config(const CommonOpts& opts) {
  ConfigFile cfg = opts.config_path.empty() ? ConfigFile() : ConfigFile::load(opts.config_path);
  if (opts.seed_override >= 0) cfg.set("seed", std::to_string(opts.seed_override));
  return cfg;
}

std::uint64_t require_seed(const ConfigFile& cfg) {
  if (!cfg.has("seed"))
    throw std::runtime_error("config key 'seed' is missing (set it in the config or pass --seed)");
  return cfg.get_u64("seed");
}

fs::path ensure_out_dir(const CommonOpts& opts) {
  fs::path dir(opts.out_dir);
  fs::create_directories(dir);
  return dir;
}

LandcoverMap load_landcover(const fs::path& world_dir, const Grid& grid) {
  const fs::path lc_csv = world_dir / "landcover.csv";
  if (fs::exists(lc_csv)) return read_landcover_csv(lc_csv);
  return landcover_from_patches(grid, world_dir / "patches");
}

std::vector<CellSample> load_presences(const fs::path& occurrences, const Grid& grid,
                                       std::size_t* outside = nullptr) {
  const LoadReport report = load_occurrences(occurrences);
  if (!report.rejected_rows.empty()) {
    std::cerr << "note: rejected " << report.rejected_rows.size() << " malformed occurrence rows:";
    for (std::size_t r : report.rejected_rows) std::cerr << ' ' << r;
    std::cerr << "\n";
  }
  AggregateResult agg = aggregate_counts(report.records, grid);
  if (agg.outside_count > 0)
    std::cerr << "note: " << agg.outside_count << " occurrence records fall outside the grid\n";
  if (outside) *outside = agg.outside_count;
  return std::move(agg.samples);
}

// Dataset shared by train/ensemble/eval: presences plus pseudo-absences for
// classification, presence counts (optionally a balanced file) for regression.
struct DataOpts {
  std::string world_dir;
  std::string occurrences;
  std::string pseudoabs;
  std::string samples;
  std::string task = "classification";
  std::string modality = "lc";
};

void add_data_opts(CLI::App* cmd, DataOpts& d, bool with_task_modality = true) {
  cmd->add_option("--world", d.world_dir, "directory with grid/covariates/landcover/patches")
      ->required();
  cmd->add_option("--occurrences", d.occurrences, "occurrence CSV")->required();
  cmd->add_option("--pseudoabs", d.pseudoabs, "pseudo-absence CSV (classification datasets)");
  cmd->add_option("--samples", d.samples, "cell sample CSV overriding the aggregated counts");
  if (with_task_modality) {
    cmd->add_option("--task", d.task, "classification|regression")
        ->check(CLI::IsMember({"classification", "regression"}));
    cmd->add_option("--modality", d.modality, "rgb|lc|ndvi")
        ->check(CLI::IsMember({"rgb", "lc", "ndvi"}));
  }
}

Task parse_task(const std::string& s) {
  return s == "regression" ? Task::Regression : Task::Classification;
}

std::vector<CellSample> build_cells(const DataOpts& d, const WorldTables& tables) {
  std::vector<CellSample> cells;
  if (!d.samples.empty()) {
    cells = read_samples_csv(d.samples, tables.grid);
  } else {
    cells = load_presences(d.occurrences, tables.grid);
  }
  if (parse_task(d.task) == Task::Classification) {
    if (d.pseudoabs.empty())
      throw std::runtime_error("classification dataset needs --pseudoabs (run pseudoabs first)");
    for (auto& s : read_pseudoabsence_csv(d.pseudoabs, tables.grid)) cells.push_back(std::move(s));
  }
  return cells;
}

EvalResult evaluate_model(const FusionModel& model, const std::vector<FusionSample>& samples) {
  EvalResult r;
  r.task = model.cfg.task;
  r.n = samples.size();
  std::vector<double> pred, truth;
  std::vector<int> labels;
  for (const auto& s : samples) {
    pred.push_back(predict_value(model, s));
    truth.push_back(s.target);
    labels.push_back(s.target > 0.5 ? 1 : 0);
  }
  if (model.cfg.task == Task::Classification) {
    r.accuracy = accuracy(labels, pred);
    try {
      r.auc = roc_auc(labels, pred);
    } catch (const std::invalid_argument&) {
      // single-class evaluation set: AUC undefined
    }
  } else {
    r.mae = mae(truth, pred);
  }
  return r;
}

int cmd_synth(const CommonOpts& common) {
  const ConfigFile cfg = load_config(common);
  const std::uint64_t seed = require_seed(cfg);
  const fs::path out = ensure_out_dir(common);
  const SyntheticWorld world = generate_world(world_config_from(cfg), seed);
  write_world(world, out);
  write_manifest(out / "synth_manifest.json", "synth", cfg, seed,
                 {out / "grid.csv", out / "occurrences.csv", out / "covariates.csv",
                  out / "landcover.csv", out / "truth.csv"});
  std::cout << "world: " << world.grid.n_rows << "x" << world.grid.n_cols << " cells, "
            << world.records.size() << " occurrence records\n";
  return 0;
}

int cmd_grid(const CommonOpts& common, const std::string& occurrences) {
  const ConfigFile cfg = load_config(common);
  const std::uint64_t seed = require_seed(cfg);
  const fs::path out = ensure_out_dir(common);

  BoundingBox bbox{};
  if (cfg.has("grid.min_lat")) {
    bbox = bbox_from(cfg);
  } else {
    if (occurrences.empty())
      throw std::runtime_error(
          "config keys grid.min_lat/min_lon/max_lat/max_lon are missing and no --occurrences "
          "file was given to derive an extent");
    const LoadReport report = load_occurrences(occurrences);
    if (report.records.empty()) throw std::runtime_error("cannot derive extent: no valid records");
    bbox = {90.0, 180.0, -90.0, -180.0};
    for (const auto& r : report.records) {
      bbox.min_lat = std::min(bbox.min_lat, r.location.lat);
      bbox.min_lon = std::min(bbox.min_lon, r.location.lon);
      bbox.max_lat = std::max(bbox.max_lat, r.location.lat);
      bbox.max_lon = std::max(bbox.max_lon, r.location.lon);
    }
    bbox.max_lat += 1e-6;
    bbox.max_lon += 1e-6;
  }
  const Grid grid = make_grid(bbox, grid_spec_from(cfg));
  write_grid_csv(grid, out / "grid.csv");
  write_manifest(out / "grid_manifest.json", "grid", cfg, seed, {out / "grid.csv"});
  std::cout << "grid: " << grid.n_rows << "x" << grid.n_cols << " cells of "
            << fmt_double(grid_spec_from(cfg).cell_area_km2) << " km2\n";
  return 0;
}

int cmd_pseudoabs(const CommonOpts& common, const DataOpts& d, const std::string& strategy_str) {
  const ConfigFile cfg = load_config(common);
  const std::uint64_t seed = require_seed(cfg);
  const fs::path out = ensure_out_dir(common);
  const fs::path world_dir(d.world_dir);

  const Grid grid = read_grid_csv(world_dir / "grid.csv");
  const LandcoverMap landcover = load_landcover(world_dir, grid);
  const std::vector<CellSample> presences = load_presences(d.occurrences, grid);
  const PseudoAbsenceConfig pa_cfg = pseudoabsence_config_from(cfg, seed);
  const PseudoAbsenceStrategy strategy = parse_strategy(strategy_str);

  const PseudoAbsenceResult result = run_strategy(strategy, grid, presences, landcover, pa_cfg);
  if (result.points.empty())
    throw std::runtime_error("no pseudo-absence candidates satisfied the '" + strategy_str +
                             "' criteria (status: " + result.status + ")");
  if (result.status != "ok") std::cerr << "note: " << result.status << "\n";

  const fs::path out_csv = out / "pseudoabsence.csv";
  write_pseudoabsence_csv(result, strategy, out_csv);
  write_manifest(out / "pseudoabs_manifest.json", "pseudoabs", cfg, seed, {out_csv});
  std::cout << "pseudo-absences: " << result.points.size() << " points (" << result.accepted
            << " of " << result.candidates_total << " candidates accepted)\n";
  return 0;
}

int cmd_balance(const CommonOpts& common, const DataOpts& d) {
  const ConfigFile cfg = load_config(common);
  const std::uint64_t seed = require_seed(cfg);
  const fs::path out = ensure_out_dir(common);
  const WorldTables tables = load_world_tables(d.world_dir);

  std::vector<CellSample> presences = load_presences(d.occurrences, tables.grid);
  for (auto& s : presences) {
    auto it = tables.covariates.by_cell.find({s.cell.row, s.cell.col});
    if (it == tables.covariates.by_cell.end())
      throw std::runtime_error("no covariates for presence cell (" + std::to_string(s.cell.row) +
                               "," + std::to_string(s.cell.col) + ")");
    s.covariates = it->second;
  }

  const OversampleResult balanced = adaptive_oversample(presences, oversample_config_from(cfg, seed));
  for (const auto& w : balanced.warnings) std::cerr << "note: " << w << "\n";
  const std::map<Country, double> weights = class_weights(presences);

  const fs::path balanced_csv = out / "balanced.csv";
  const fs::path weights_csv = out / "class_weights.csv";
  write_samples_csv(balanced.samples, balanced_csv, /*with_origin=*/true);
  {
    CsvWriter w(weights_csv, {"country", "weight"});
    for (const auto& [country, weight] : weights)
      w.row({country_name(country), fmt_double(weight)});
  }
  write_manifest(out / "balance_manifest.json", "balance", cfg, seed,
                 {balanced_csv, weights_csv});
  std::cout << "balanced: " << presences.size() << " -> " << balanced.samples.size()
            << " samples\n";
  return 0;
}

std::map<Country, double> read_class_weights(const fs::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t c_country = table.column("country");
  const std::size_t c_weight = table.column("weight");
  std::map<Country, double> out;
  for (const auto& row : table.rows)
    out[parse_country(row[c_country])] = parse_double(row[c_weight]);
  return out;
}

int cmd_train(const CommonOpts& common, const DataOpts& d, const std::string& weights_csv) {
  const ConfigFile cfg = load_config(common);
  const std::uint64_t seed = require_seed(cfg);
  const fs::path out = ensure_out_dir(common);
  const WorldTables tables = load_world_tables(d.world_dir);
  const Task task = parse_task(d.task);
  const Modality modality = parse_modality(d.modality);

  const std::vector<CellSample> cells = build_cells(d, tables);
  auto [train_cells, test_cells] =
      split_train_test(cells, cfg.get_double("train.split_ratio", 0.8), seed);

  const FusionConfig fusion_cfg = fusion_config_from(
      cfg, modality, task, static_cast<int>(tables.covariates.feature_names.size()), seed);
  TrainConfig train_cfg = train_config_from(cfg, seed);
  if (!weights_csv.empty())
    train_cfg.class_weights = read_class_weights(weights_csv);
  else if (cfg.get_bool("train.use_class_weights", false))
    train_cfg.class_weights = class_weights(train_cells);

  const std::vector<FusionSample> train_set =
      make_fusion_samples(tables, train_cells, modality, fusion_cfg);
  const std::vector<FusionSample> test_set =
      make_fusion_samples(tables, test_cells, modality, fusion_cfg);
  const TrainResult result = train_fusion(fusion_cfg, train_cfg, train_set, test_set);

  const fs::path model_path = out / ("model_" + d.modality + ".bin");
  const fs::path trace_path = out / ("trace_" + d.modality + ".csv");
  write_checkpoint(result.model, model_path);
  write_trace_csv(result.trace, trace_path);
  write_manifest(out / ("train_" + d.modality + "_manifest.json"), "train", cfg, seed,
                 {model_path, trace_path});

  const TraceRow& last = result.trace.back();
  std::cout << "trained " << d.modality << " " << d.task << ": train "
            << fmt_double(last.train_metric) << ", test " << fmt_double(last.test_metric)
            << " (" << (task == Task::Classification ? "accuracy" : "mae") << ")\n";
  return 0;
}

struct ModelPaths {
  std::string rgb, lc, ndvi;
};

std::map<Modality, FusionModel> load_models(const ModelPaths& paths) {
  std::map<Modality, FusionModel> models;
  models.emplace(Modality::RGB, read_checkpoint(paths.rgb));
  models.emplace(Modality::LC, read_checkpoint(paths.lc));
  models.emplace(Modality::NDVI, read_checkpoint(paths.ndvi));
  return models;
}

// Per-cell predictions from the three modality models, plus the truth value.
std::pair<std::vector<std::array<double, 3>>, std::vector<double>> model_predictions(
    const std::map<Modality, FusionModel>& models, const WorldTables& tables,
    const std::vector<CellSample>& cells) {
  static constexpr std::array<Modality, 3> kOrder = {Modality::RGB, Modality::LC, Modality::NDVI};
  std::vector<std::array<double, 3>> preds(cells.size());
  std::vector<double> truth(cells.size());
  for (std::size_t m = 0; m < kOrder.size(); ++m) {
    const FusionModel& fm = models.at(kOrder[m]);
    const std::vector<FusionSample> samples = make_fusion_samples(tables, cells, kOrder[m], fm.cfg);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      preds[i][m] = predict_value(fm, samples[i]);
      truth[i] = samples[i].target;
    }
  }
  return {std::move(preds), std::move(truth)};
}

int cmd_ensemble(const CommonOpts& common, const DataOpts& d, const ModelPaths& paths) {
  const ConfigFile cfg = load_config(common);
  const std::uint64_t seed = require_seed(cfg);
  const fs::path out = ensure_out_dir(common);
  const WorldTables tables = load_world_tables(d.world_dir);

  const std::vector<CellSample> cells = build_cells(d, tables);
  auto [train_cells, test_cells] =
      split_train_test(cells, cfg.get_double("train.split_ratio", 0.8), seed);

  const std::map<Modality, FusionModel> models = load_models(paths);
  const auto [preds, truth] = model_predictions(models, tables, test_cells);
  const OptimizeResult result = optimize_weights(preds, truth, seed);

  const fs::path weights_path = out / "ensemble_weights.csv";
  write_weights_csv(result.weights, weights_path);
  write_manifest(out / "ensemble_manifest.json", "ensemble", cfg, seed, {weights_path});
  std::cout << "ensemble weights: rgb " << fmt_double(result.weights.w[0]) << ", lc "
            << fmt_double(result.weights.w[1]) << ", ndvi " << fmt_double(result.weights.w[2])
            << " (held-out mae " << fmt_double(result.mae) << ")\n";
  return 0;
}

int cmd_rfe(const CommonOpts& common, const DataOpts& d, int keep) {
  const ConfigFile cfg = load_config(common);
  const std::uint64_t seed = require_seed(cfg);
  const fs::path out = ensure_out_dir(common);
  const WorldTables tables = load_world_tables(d.world_dir);

  const std::vector<CellSample> cells =
      d.samples.empty() ? load_presences(d.occurrences, tables.grid)
                        : read_samples_csv(d.samples, tables.grid);
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (const auto& s : cells) {
    auto it = tables.covariates.by_cell.find({s.cell.row, s.cell.col});
    if (it == tables.covariates.by_cell.end()) continue;
    X.push_back(it->second.values);
    y.push_back(static_cast<double>(s.count));
  }
  if (X.size() < 2) throw std::runtime_error("rfe: need at least 2 cells with covariates");

  ForestConfig forest_cfg;
  forest_cfg.n_trees = static_cast<int>(cfg.get_long("forest.n_trees", 100));
  forest_cfg.max_depth = static_cast<int>(cfg.get_long("forest.max_depth", 8));
  forest_cfg.features_per_split = static_cast<int>(cfg.get_long("forest.features_per_split", 0));
  forest_cfg.seed = seed;
  if (keep < 1) keep = static_cast<int>(tables.covariates.feature_names.size());

  const RfeReport report = rfe(X, y, tables.covariates.feature_names, keep, forest_cfg);
  const fs::path importance_csv = out / "importance.csv";
  write_importance_csv(report, importance_csv);
  write_manifest(out / "rfe_manifest.json", "rfe", cfg, seed, {importance_csv});
  std::cout << "rfe kept " << report.ranking.size() << " features; top: "
            << report.ranking.front().feature << " ("
            << fmt_double(report.ranking.front().importance) << ")\n";
  return 0;
}

int cmd_eval(const CommonOpts& common, const DataOpts& d, const std::string& checkpoint,
             const ModelPaths& paths, const std::string& weights_file, const std::string& split) {
  const ConfigFile cfg = load_config(common);
  const std::uint64_t seed = require_seed(cfg);
  const fs::path out = ensure_out_dir(common);
  const WorldTables tables = load_world_tables(d.world_dir);

  const std::vector<CellSample> all_cells = build_cells(d, tables);
  std::vector<CellSample> cells;
  if (split == "all") {
    cells = all_cells;
  } else {
    auto [train_cells, test_cells] =
        split_train_test(all_cells, cfg.get_double("train.split_ratio", 0.8), seed);
    cells = split == "train" ? std::move(train_cells) : std::move(test_cells);
  }

  std::vector<std::pair<std::string, EvalResult>> rows;
  if (!checkpoint.empty()) {
    const FusionModel model = read_checkpoint(checkpoint);
    const Modality modality = parse_modality(d.modality);
    rows.emplace_back(d.modality,
                      evaluate_model(model, make_fusion_samples(tables, cells, modality, model.cfg)));
  } else {
    if (paths.rgb.empty() || paths.lc.empty() || paths.ndvi.empty())
      throw std::runtime_error("eval needs either --checkpoint or all of --model-rgb/lc/ndvi");
    const std::map<Modality, FusionModel> models = load_models(paths);
    const Task task = models.at(Modality::RGB).cfg.task;
    const auto [preds, truth] = model_predictions(models, tables, cells);

    static const char* names[3] = {"rgb", "lc", "ndvi"};
    std::vector<int> labels(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) labels[i] = truth[i] > 0.5 ? 1 : 0;
    auto column_result = [&](const std::vector<double>& column) {
      EvalResult r;
      r.task = task;
      r.n = column.size();
      if (task == Task::Classification) {
        r.accuracy = accuracy(labels, column);
        try {
          r.auc = roc_auc(labels, column);
        } catch (const std::invalid_argument&) {
        }
      } else {
        r.mae = mae(truth, column);
      }
      return r;
    };
    for (int m = 0; m < 3; ++m) {
      std::vector<double> column(preds.size());
      for (std::size_t i = 0; i < preds.size(); ++i) column[i] = preds[i][m];
      rows.emplace_back(names[m], column_result(column));
    }
    if (!weights_file.empty()) {
      const EnsembleWeights weights = read_weights_csv(weights_file);
      std::vector<double> column(preds.size());
      for (std::size_t i = 0; i < preds.size(); ++i) column[i] = ensemble_predict(weights, preds[i]);
      rows.emplace_back("ensemble", column_result(column));
    }
  }

  const fs::path eval_csv = out / "eval.csv";
  {
    CsvWriter w(eval_csv, {"model", "task", "n", "mae", "accuracy", "auc"});
    for (const auto& [name, r] : rows)
      w.row({name, task_name(r.task), std::to_string(r.n),
             r.mae ? fmt_double(*r.mae) : "", r.accuracy ? fmt_double(*r.accuracy) : "",
             r.auc ? fmt_double(*r.auc) : ""});
  }

  std::vector<BarDatum> bars;
  std::string metric_name;
  for (const auto& [name, r] : rows) {
    if (r.task == Task::Classification) {
      metric_name = r.auc ? "roc auc" : "accuracy";
      bars.push_back({name, r.auc ? *r.auc : r.accuracy.value_or(0.0)});
    } else {
      metric_name = "mae";
      bars.push_back({name, r.mae.value_or(0.0)});
    }
  }
  const fs::path chart_svg = out / "chart.svg";
  write_bar_chart("model comparison (" + metric_name + ", " + split + " split)", bars, chart_svg);
  write_manifest(out / "eval_manifest.json", "eval", cfg, seed, {eval_csv, chart_svg});

  for (const auto& [name, r] : rows) {
    std::cout << name << ": n=" << r.n;
    if (r.mae) std::cout << " mae=" << fmt_double(*r.mae);
    if (r.accuracy) std::cout << " accuracy=" << fmt_double(*r.accuracy);
    if (r.auc) std::cout << " auc=" << fmt_double(*r.auc);
    std::cout << "\n";
  }
  return 0;
}

int cmd_dump(const std::string& patch_path, const std::string& band) {
  const RasterPatch patch = read_patch(patch_path);
  if (band.empty()) {
    std::cout << patch.height << "x" << patch.width << ", bands:";
    for (const auto& b : patch.bands) std::cout << ' ' << b.name;
    std::cout << "\n";
    return 0;
  }
  std::cout << band_to_text(patch, band);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"species distribution modeling pipeline"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOpts common;
  DataOpts data;
  std::string strategy = "proposed";
  std::string occurrences_for_grid;
  std::string checkpoint, weights_file, split = "test";
  ModelPaths model_paths;
  int keep = 0;

  auto* synth = app.add_subcommand("synth", "generate a synthetic world with known truth");
  add_common(synth, common, /*config_required=*/false);

  auto* grid = app.add_subcommand("grid", "build the analysis grid");
  add_common(grid, common, /*config_required=*/false);
  grid->add_option("--occurrences", occurrences_for_grid,
                   "occurrence CSV used to derive the extent when the config has none");

  auto* pseudoabs = app.add_subcommand("pseudoabs", "generate pseudo-absence points");
  add_common(pseudoabs, common, /*config_required=*/false);
  add_data_opts(pseudoabs, data, /*with_task_modality=*/false);
  pseudoabs->add_option("--strategy", strategy, "proposed|random_selection|distance_criteria")
      ->check(CLI::IsMember({"proposed", "random_selection", "distance_criteria"}));

  auto* balance = app.add_subcommand("balance", "oversample minority count bins, emit class weights");
  add_common(balance, common, /*config_required=*/false);
  add_data_opts(balance, data, /*with_task_modality=*/false);

  auto* train = app.add_subcommand("train", "train a late-fusion model for one modality");
  add_common(train, common, /*config_required=*/false);
  add_data_opts(train, data);
  train->add_option("--class-weights", weights_file, "class weight CSV from the balance stage");

  auto* ensemble = app.add_subcommand("ensemble", "fit ensemble weights over three modality models");
  add_common(ensemble, common, /*config_required=*/false);
  add_data_opts(ensemble, data);
  ensemble->add_option("--model-rgb", model_paths.rgb, "rgb model checkpoint")->required();
  ensemble->add_option("--model-lc", model_paths.lc, "lc model checkpoint")->required();
  ensemble->add_option("--model-ndvi", model_paths.ndvi, "ndvi model checkpoint")->required();

  auto* rfe_cmd = app.add_subcommand("rfe", "rank covariates by forest importance with elimination");
  add_common(rfe_cmd, common, /*config_required=*/false);
  add_data_opts(rfe_cmd, data, /*with_task_modality=*/false);
  rfe_cmd->add_option("--keep", keep, "number of features to retain (default: all)");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate checkpoints, emit metrics CSV and chart");
  add_common(eval_cmd, common, /*config_required=*/false);
  add_data_opts(eval_cmd, data);
  eval_cmd->add_option("--checkpoint", checkpoint, "single model checkpoint");
  eval_cmd->add_option("--model-rgb", model_paths.rgb, "rgb model checkpoint");
  eval_cmd->add_option("--model-lc", model_paths.lc, "lc model checkpoint");
  eval_cmd->add_option("--model-ndvi", model_paths.ndvi, "ndvi model checkpoint");
  eval_cmd->add_option("--weights", weights_file, "ensemble weight CSV");
  eval_cmd->add_option("--split", split, "test|train|all")
      ->check(CLI::IsMember({"test", "train", "all"}));

  auto* dump = app.add_subcommand("dump", "print a patch band as a plain-text matrix");
  std::string patch_path, band;
  dump->add_option("--patch", patch_path, "patch file")->required();
  dump->add_option("--band", band, "band name (omit to list bands)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(common);
    if (grid->parsed()) return cmd_grid(common, occurrences_for_grid);
    if (pseudoabs->parsed()) return cmd_pseudoabs(common, data, strategy);
    if (balance->parsed()) return cmd_balance(common, data);
    if (train->parsed()) return cmd_train(common, data, weights_file);
    if (ensemble->parsed()) return cmd_ensemble(common, data, model_paths);
    if (rfe_cmd->parsed()) return cmd_rfe(common, data, keep);
    if (eval_cmd->parsed()) return cmd_eval(common, data, checkpoint, model_paths, weights_file, split);
    if (dump->parsed()) return cmd_dump(patch_path, band);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
