#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "frogsdm/csv.hpp"
#include "frogsdm/geo.hpp"
#include "frogsdm/occurrence.hpp"
#include "frogsdm/rng.hpp"

namespace frogsdm {

struct PseudoAbsenceConfig {
  std::map<Country, double> thresholds_km = {
      {Country::AU, 10.0}, {Country::SA, 20.0}, {Country::CR, 28.0}};
  double ratio = 1.0;  // pseudo-absences per presence; +inf disables subsampling
  std::uint64_t seed = 0;
};

enum class PseudoAbsenceStrategy { Proposed, RandomSelection, DistanceCriteria };

inline std::string strategy_name(PseudoAbsenceStrategy s) {
  switch (s) {
    case PseudoAbsenceStrategy::Proposed: return "proposed";
    case PseudoAbsenceStrategy::RandomSelection: return "random_selection";
    default: return "distance_criteria";
  }
}

inline PseudoAbsenceStrategy parse_strategy(const std::string& s) {
  if (s == "proposed") return PseudoAbsenceStrategy::Proposed;
  if (s == "random_selection") return PseudoAbsenceStrategy::RandomSelection;
  if (s == "distance_criteria") return PseudoAbsenceStrategy::DistanceCriteria;
  throw std::invalid_argument("unknown strategy '" + s +
                              "' (expected proposed|random_selection|distance_criteria)");
}

struct PseudoAbsencePoint {
  GridCell cell;
  GeoPoint anchor_presence;  // centroid of the nearest presence cell
  double distance_km = 0.0;
  int landcover_class = 0;  // the candidate cell's dominant class
  Country country = Country::AU;
};

struct PseudoAbsenceResult {
  std::vector<PseudoAbsencePoint> points;
  std::size_t candidates_total = 0;  // presence-free cells examined
  std::size_t accepted = 0;          // cells passing the strategy's predicates
  std::string status;                // "ok", "empty", or a warning
};

using LandcoverMap = std::map<std::pair<int, int>, int>;

namespace detail {

struct PresenceRef {
  GeoPoint centroid;
  Country country;
  int landcover = 0;
};

inline std::vector<PresenceRef> presence_refs(const std::vector<CellSample>& presences,
                                              const LandcoverMap& landcover) {
  if (presences.empty()) throw std::invalid_argument("pseudo-absence: no presence samples");
  std::vector<PresenceRef> refs;
  refs.reserve(presences.size());
  for (const auto& p : presences) {
    auto it = landcover.find({p.cell.row, p.cell.col});
    if (it == landcover.end())
      throw std::invalid_argument("pseudo-absence: presence cell (" + std::to_string(p.cell.row) +
                                  "," + std::to_string(p.cell.col) + ") has no landcover class");
    refs.push_back({p.cell.centroid, p.country, it->second});
  }
  return refs;
}

// Nearest presence by centroid distance; ties resolve to the first in input
// order so results are deterministic.
inline std::pair<std::size_t, double> nearest_presence(const std::vector<PresenceRef>& refs,
                                                       const GeoPoint& point) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const double d = haversine_distance(refs[i].centroid, point);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return {best, best_d};
}

inline PseudoAbsenceResult select_points(std::vector<PseudoAbsencePoint> accepted,
                                         std::size_t candidates_total, std::size_t n_presences,
                                         const PseudoAbsenceConfig& cfg) {
  PseudoAbsenceResult result;
  result.candidates_total = candidates_total;
  result.accepted = accepted.size();
  if (accepted.empty()) {
    result.status = "empty";
    return result;
  }
  std::size_t target = accepted.size();
  if (std::isfinite(cfg.ratio))
    target = static_cast<std::size_t>(std::llround(cfg.ratio * static_cast<double>(n_presences)));
  if (target >= accepted.size()) {
    result.points = std::move(accepted);
    result.status = target > result.points.size()
                        ? "warning: only " + std::to_string(result.points.size()) + " of " +
                              std::to_string(target) + " requested points available"
                        : "ok";
    return result;
  }
  Rng rng(cfg.seed);
  std::vector<std::size_t> chosen = rng.sample_without_replacement(accepted.size(), target);
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t i : chosen) result.points.push_back(accepted[i]);
  result.status = "ok";
  return result;
}

inline PseudoAbsenceResult generate(const Grid& grid, const std::vector<CellSample>& presences,
                                    const LandcoverMap& landcover, const PseudoAbsenceConfig& cfg,
                                    PseudoAbsenceStrategy strategy) {
  const std::vector<PresenceRef> refs = presence_refs(presences, landcover);
  std::vector<bool> has_presence(grid.size(), false);
  for (const auto& p : presences)
    has_presence[static_cast<std::size_t>(p.cell.row) * grid.n_cols + p.cell.col] = true;

  std::vector<PseudoAbsencePoint> accepted;
  std::size_t candidates = 0;
  for (const GridCell& cell : grid.cells) {
    if (has_presence[static_cast<std::size_t>(cell.row) * grid.n_cols + cell.col]) continue;
    ++candidates;
    const auto [anchor, d] = nearest_presence(refs, cell.centroid);
    if (strategy != PseudoAbsenceStrategy::RandomSelection) {
      const auto thr = cfg.thresholds_km.find(refs[anchor].country);
      if (thr == cfg.thresholds_km.end())
        throw std::invalid_argument("pseudo-absence: no distance threshold for country " +
                                    country_name(refs[anchor].country));
      if (!(d > 0.0 && d <= thr->second)) continue;
    }
    int cell_class = 0;
    if (auto it = landcover.find({cell.row, cell.col}); it != landcover.end()) {
      cell_class = it->second;
    } else if (strategy == PseudoAbsenceStrategy::Proposed) {
      throw std::invalid_argument("pseudo-absence: candidate cell (" + std::to_string(cell.row) +
                                  "," + std::to_string(cell.col) + ") has no landcover class");
    }
    if (strategy == PseudoAbsenceStrategy::Proposed && cell_class != refs[anchor].landcover)
      continue;
    accepted.push_back(
        {cell, refs[anchor].centroid, d, cell_class, refs[anchor].country});
  }
  return select_points(std::move(accepted), candidates, presences.size(), cfg);
}

}  // namespace detail

// Accept presence-free cells whose centroid lies within the anchor country's
// distance threshold of the nearest presence and whose dominant landcover
// class matches that presence cell's class, then subsample to ratio x |presences|.
inline PseudoAbsenceResult generate_pseudo_absences(const Grid& grid,
                                                    const std::vector<CellSample>& presences,
                                                    const LandcoverMap& landcover,
                                                    const PseudoAbsenceConfig& cfg) {
  return detail::generate(grid, presences, landcover, cfg, PseudoAbsenceStrategy::Proposed);
}

// Baseline: uniform seeded sample of presence-free cells, no predicates.
inline PseudoAbsenceResult random_selection(const Grid& grid,
                                            const std::vector<CellSample>& presences,
                                            const LandcoverMap& landcover,
                                            const PseudoAbsenceConfig& cfg) {
  return detail::generate(grid, presences, landcover, cfg, PseudoAbsenceStrategy::RandomSelection);
}

// Baseline: distance predicate only, no landcover match.
inline PseudoAbsenceResult distance_criteria(const Grid& grid,
                                             const std::vector<CellSample>& presences,
                                             const LandcoverMap& landcover,
                                             const PseudoAbsenceConfig& cfg) {
  return detail::generate(grid, presences, landcover, cfg, PseudoAbsenceStrategy::DistanceCriteria);
}

inline PseudoAbsenceResult run_strategy(PseudoAbsenceStrategy strategy, const Grid& grid,
                                        const std::vector<CellSample>& presences,
                                        const LandcoverMap& landcover,
                                        const PseudoAbsenceConfig& cfg) {
  return detail::generate(grid, presences, landcover, cfg, strategy);
}

inline void write_pseudoabsence_csv(const PseudoAbsenceResult& result,
                                    PseudoAbsenceStrategy strategy,
                                    const std::filesystem::path& path) {
  CsvWriter out(path, {"row", "col", "country", "distance_km", "landcover_class", "strategy"});
  for (const auto& p : result.points)
    out.row({std::to_string(p.cell.row), std::to_string(p.cell.col), country_name(p.country),
             fmt_double(p.distance_km), std::to_string(p.landcover_class),
             strategy_name(strategy)});
}

inline std::vector<CellSample> read_pseudoabsence_csv(const std::filesystem::path& path,
                                                      const Grid& grid) {
  const CsvTable table = read_csv(path);
  const std::size_t c_row = table.column("row");
  const std::size_t c_col = table.column("col");
  const std::size_t c_country = table.column("country");
  std::vector<CellSample> out;
  for (const auto& row : table.rows) {
    CellSample s;
    s.cell = grid.at(static_cast<int>(parse_long(row[c_row])),
                     static_cast<int>(parse_long(row[c_col])));
    s.country = parse_country(row[c_country]);
    s.count = 0;
    s.label_presence = false;
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<CellSample> pseudo_absences_as_samples(const PseudoAbsenceResult& result) {
  std::vector<CellSample> out;
  out.reserve(result.points.size());
  for (const auto& p : result.points) {
    CellSample s;
    s.cell = p.cell;
    s.count = 0;
    s.country = p.country;
    s.label_presence = false;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace frogsdm
