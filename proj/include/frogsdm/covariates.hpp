#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace frogsdm {

// TerraClimate-style monthly climate variables, in canonical order.
inline const std::vector<std::string>& climate_feature_names() {
  static const std::vector<std::string> names = {"tmax", "tmin", "pet", "ppt", "vap",
                                                 "vpd",  "soil", "ws",  "q",   "pdsi"};
  return names;
}

// Values are positional; the owning table carries the feature names so the
// canonical ten can be extended with extra named features.
struct CovariateVector {
  std::vector<double> values;
};

inline void validate_covariates(const CovariateVector& v) {
  for (double x : v.values)
    if (!std::isfinite(x)) throw std::invalid_argument("covariate value is not finite");
}

// Per-feature z-score statistics. Zero-variance features map to 0 so a
// constant column cannot produce NaN downstream.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  void fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("standardizer: empty input");
    const std::size_t dim = rows[0].size();
    mean.assign(dim, 0.0);
    stddev.assign(dim, 0.0);
    for (const auto& r : rows) {
      if (r.size() != dim) throw std::invalid_argument("standardizer: ragged input");
      for (std::size_t j = 0; j < dim; ++j) mean[j] += r[j];
    }
    for (double& m : mean) m /= static_cast<double>(rows.size());
    for (const auto& r : rows)
      for (std::size_t j = 0; j < dim; ++j) {
        const double d = r[j] - mean[j];
        stddev[j] += d * d;
      }
    for (double& s : stddev) s = std::sqrt(s / static_cast<double>(rows.size()));
  }

  std::vector<double> transform(const std::vector<double>& row) const {
    if (row.size() != mean.size()) throw std::invalid_argument("standardizer: dim mismatch");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j)
      out[j] = stddev[j] > 0.0 ? (row[j] - mean[j]) / stddev[j] : 0.0;
    return out;
  }

  std::vector<std::vector<double>> transform_all(const std::vector<std::vector<double>>& rows) const {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(transform(r));
    return out;
  }
};

}  // namespace frogsdm
