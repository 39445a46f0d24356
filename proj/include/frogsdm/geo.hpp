#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "frogsdm/csv.hpp"

namespace frogsdm {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kKmPerDegree = 111.195;  // meridian arc per degree on the 6371 km sphere

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]
};

inline bool is_valid(const GeoPoint& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

struct BoundingBox {
  double min_lat = 0.0;
  double min_lon = 0.0;
  double max_lat = 0.0;
  double max_lon = 0.0;

  bool contains(const GeoPoint& p) const {
    return p.lat >= min_lat && p.lat <= max_lat && p.lon >= min_lon && p.lon <= max_lon;
  }
};

inline void validate_bbox(const BoundingBox& b) {
  if (!(b.min_lat < b.max_lat) || !(b.min_lon < b.max_lon))
    throw std::invalid_argument("bounding box is degenerate (min must be < max on both axes)");
}

struct GridSpec {
  double cell_area_km2 = 30.0;

  double cell_side_km() const { return std::sqrt(cell_area_km2); }
};

struct GridCell {
  int row = 0;
  int col = 0;
  BoundingBox bbox;
  GeoPoint centroid;
};

struct Grid {
  BoundingBox bbox;
  double lat_step_deg = 0.0;
  double lon_step_deg = 0.0;
  int n_rows = 0;
  int n_cols = 0;
  std::vector<GridCell> cells;  // row-major

  const GridCell& at(int row, int col) const {
    return cells[static_cast<std::size_t>(row) * n_cols + col];
  }
  std::size_t size() const { return cells.size(); }
};

inline double deg2rad(double d) { return d * M_PI / 180.0; }

// Great-circle distance in km on the R = 6371 sphere.
inline double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
  const double lat1 = deg2rad(a.lat), lat2 = deg2rad(b.lat);
  const double dlat = lat2 - lat1;
  const double dlon = deg2rad(b.lon - a.lon);
  const double sa = std::sin(dlat / 2.0);
  const double sb = std::sin(dlon / 2.0);
  double h = sa * sa + std::cos(lat1) * std::cos(lat2) * sb * sb;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

// Tiles the bbox with cells of side sqrt(cell_area_km2). Steps use the
// local-cosine degree conversion at the bbox mid latitude; boundary cells are
// clipped so the union of cell bboxes is exactly the input bbox.
inline Grid make_grid(const BoundingBox& bbox, const GridSpec& spec) {
  validate_bbox(bbox);
  if (!(spec.cell_area_km2 > 0.0)) throw std::invalid_argument("cell area must be positive");

  const double side_km = spec.cell_side_km();
  const double mid_lat = 0.5 * (bbox.min_lat + bbox.max_lat);
  const double lat_step = side_km / kKmPerDegree;
  const double lon_step = side_km / (kKmPerDegree * std::cos(deg2rad(mid_lat)));

  // Small slack so an exact multiple of the step does not gain a sliver cell.
  const double slack = 1e-9;
  const int n_rows = std::max(1, static_cast<int>(std::ceil((bbox.max_lat - bbox.min_lat) / lat_step - slack)));
  const int n_cols = std::max(1, static_cast<int>(std::ceil((bbox.max_lon - bbox.min_lon) / lon_step - slack)));

  Grid grid;
  grid.bbox = bbox;
  grid.lat_step_deg = lat_step;
  grid.lon_step_deg = lon_step;
  grid.n_rows = n_rows;
  grid.n_cols = n_cols;
  grid.cells.reserve(static_cast<std::size_t>(n_rows) * n_cols);
  for (int r = 0; r < n_rows; ++r) {
    const double lat_lo = bbox.min_lat + r * lat_step;
    const double lat_hi = (r == n_rows - 1) ? bbox.max_lat : std::min(bbox.max_lat, bbox.min_lat + (r + 1) * lat_step);
    for (int c = 0; c < n_cols; ++c) {
      const double lon_lo = bbox.min_lon + c * lon_step;
      const double lon_hi = (c == n_cols - 1) ? bbox.max_lon : std::min(bbox.max_lon, bbox.min_lon + (c + 1) * lon_step);
      GridCell cell;
      cell.row = r;
      cell.col = c;
      cell.bbox = {lat_lo, lon_lo, lat_hi, lon_hi};
      cell.centroid = {0.5 * (lat_lo + lat_hi), 0.5 * (lon_lo + lon_hi)};
      grid.cells.push_back(cell);
    }
  }
  return grid;
}

// Unique containing cell: lower edges inclusive, upper edges exclusive, with
// the topmost/rightmost cells closed so the whole bbox is covered. Returns
// nullptr for points outside the grid bbox.
inline const GridCell* cell_containing(const Grid& grid, const GeoPoint& p) {
  if (!grid.bbox.contains(p)) return nullptr;

  auto locate = [](double v, double lo, double hi, double step, int n) {
    int i = (v >= hi) ? n - 1 : static_cast<int>(std::floor((v - lo) / step));
    return std::clamp(i, 0, n - 1);
  };
  int r = locate(p.lat, grid.bbox.min_lat, grid.bbox.max_lat, grid.lat_step_deg, grid.n_rows);
  int c = locate(p.lon, grid.bbox.min_lon, grid.bbox.max_lon, grid.lon_step_deg, grid.n_cols);

  // The floor index can be off by one at cell edges; settle against the
  // stored bounds, which are the source of truth for the inclusion rule.
  while (r > 0 && p.lat < grid.at(r, c).bbox.min_lat) --r;
  while (r < grid.n_rows - 1 && p.lat >= grid.at(r + 1, c).bbox.min_lat) ++r;
  while (c > 0 && p.lon < grid.at(r, c).bbox.min_lon) --c;
  while (c < grid.n_cols - 1 && p.lon >= grid.at(r, c + 1).bbox.min_lon) ++c;
  return &grid.at(r, c);
}

inline void write_grid_csv(const Grid& grid, const std::filesystem::path& path) {
  CsvWriter w(path, {"row", "col", "min_lat", "min_lon", "max_lat", "max_lon", "centroid_lat",
                     "centroid_lon"});
  for (const GridCell& c : grid.cells) {
    w.row({std::to_string(c.row), std::to_string(c.col), fmt_double(c.bbox.min_lat),
           fmt_double(c.bbox.min_lon), fmt_double(c.bbox.max_lat), fmt_double(c.bbox.max_lon),
           fmt_double(c.centroid.lat), fmt_double(c.centroid.lon)});
  }
}

}  // namespace frogsdm
