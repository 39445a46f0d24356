#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "frogsdm/covariates.hpp"
#include "frogsdm/occurrence.hpp"
#include "frogsdm/rng.hpp"

namespace frogsdm {

// weight_x = (N_total / N_x) * C with C = number of countries present, so
// N_x * weight_x = N_total * C for every class.
inline std::map<Country, double> class_weights(const std::vector<CellSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("class_weights: empty input");
  std::map<Country, std::size_t> counts;
  for (const auto& s : samples) ++counts[s.country];
  const double n_total = static_cast<double>(samples.size());
  const double n_classes = static_cast<double>(counts.size());
  std::map<Country, double> weights;
  for (const auto& [country, n] : counts)
    weights[country] = n_total / static_cast<double>(n) * n_classes;
  return weights;
}

struct KMeansResult {
  std::vector<int> assignments;
  std::vector<std::vector<double>> centroids;
  std::vector<double> inertia_history;  // after each Lloyd update
  int iterations = 0;
};

namespace detail {

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace detail

// Lloyd's algorithm with k-means++ seeding. An emptied cluster keeps its old
// centroid so inertia stays monotone non-increasing.
inline KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k, Rng& rng,
                           int max_iters = 100) {
  if (points.empty()) throw std::invalid_argument("kmeans: empty input");
  if (k < 1 || static_cast<std::size_t>(k) > points.size())
    throw std::invalid_argument("kmeans: k must be in [1, n_points]");
  const std::size_t n = points.size();

  KMeansResult result;
  result.centroids.push_back(points[rng.uniform_index(n)]);
  std::vector<double> d2(n);
  while (result.centroids.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : result.centroids)
        best = std::min(best, detail::squared_distance(points[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_index(n);
    }
    result.centroids.push_back(points[pick]);
  }

  result.assignments.assign(n, -1);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = detail::squared_distance(points[i], result.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (best != result.assignments[i]) {
        result.assignments[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    ++result.iterations;

    const std::size_t dim = points[0].size();
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const int c = result.assignments[i];
      ++sizes[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c][j] += points[i][j];
    }
    for (int c = 0; c < k; ++c)
      if (sizes[c] > 0)
        for (std::size_t j = 0; j < dim; ++j)
          result.centroids[c][j] = sums[c][j] / static_cast<double>(sizes[c]);

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      inertia += detail::squared_distance(points[i], result.centroids[result.assignments[i]]);
    result.inertia_history.push_back(inertia);
  }

  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const double d = detail::squared_distance(points[i], result.centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    result.assignments[i] = best;
  }
  return result;
}

struct CountBin {
  long lo = 0;
  long hi = 0;  // inclusive
};

struct OversampleConfig {
  int n_clusters = 8;
  long target_per_bin = 0;  // 0 = grow every bin toward the largest bin's size
  std::vector<CountBin> count_bins = {
      {1, 10}, {11, 40}, {41, 100}, {101, std::numeric_limits<long>::max()}};
  std::uint64_t seed = 0;
};

struct OversampleResult {
  std::vector<CellSample> samples;
  std::vector<std::string> warnings;
  std::vector<std::size_t> bin_before;
  std::vector<std::size_t> bin_after;
};

namespace detail {

inline int bin_of(long count, const std::vector<CountBin>& bins) {
  for (std::size_t b = 0; b < bins.size(); ++b)
    if (count >= bins[b].lo && count <= bins[b].hi) return static_cast<int>(b);
  return -1;
}

}  // namespace detail

// Minority count-bins are topped up with cluster-stratified copies of their
// own members: K-means over z-scored covariates, then nearest-to-centroid
// representatives round-robin across clusters. Each original sample appears
// at most twice in the output.
inline OversampleResult adaptive_oversample(const std::vector<CellSample>& samples,
                                            const OversampleConfig& cfg) {
  if (samples.empty()) throw std::invalid_argument("oversample: empty input");
  if (cfg.n_clusters < 1) throw std::invalid_argument("oversample: n_clusters must be >= 1");
  for (std::size_t b = 1; b < cfg.count_bins.size(); ++b)
    if (cfg.count_bins[b].lo <= cfg.count_bins[b - 1].hi)
      throw std::invalid_argument("oversample: count bins must be disjoint and ordered");

  OversampleResult result;
  result.samples = samples;

  std::vector<int> bin_idx(samples.size());
  std::vector<std::size_t> bin_freq(cfg.count_bins.size(), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    bin_idx[i] = detail::bin_of(samples[i].count, cfg.count_bins);
    if (bin_idx[i] >= 0) ++bin_freq[bin_idx[i]];
  }
  result.bin_before = bin_freq;
  result.bin_after = bin_freq;

  const long target = cfg.target_per_bin > 0
                          ? cfg.target_per_bin
                          : static_cast<long>(*std::max_element(bin_freq.begin(), bin_freq.end()));

  std::vector<std::size_t> minority;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (bin_idx[i] >= 0 && static_cast<long>(bin_freq[bin_idx[i]]) < target) minority.push_back(i);
  if (minority.empty()) return result;

  std::vector<std::vector<double>> features;
  features.reserve(minority.size());
  for (std::size_t i : minority) {
    if (samples[i].covariates.values.empty())
      throw std::invalid_argument("oversample: sample lacks covariates");
    features.push_back(samples[i].covariates.values);
  }
  Standardizer scaler;
  scaler.fit(features);
  features = scaler.transform_all(features);

  int k = cfg.n_clusters;
  if (static_cast<std::size_t>(k) > minority.size()) {
    k = static_cast<int>(minority.size());
    result.warnings.push_back("n_clusters reduced to " + std::to_string(k) +
                              " (minority size)");
  }
  Rng rng(cfg.seed);
  const KMeansResult km = kmeans(features, k, rng);

  // Per cluster, minority positions ordered nearest-to-centroid first.
  std::vector<std::vector<std::size_t>> cluster_order(k);
  {
    std::vector<std::pair<double, std::size_t>> keyed(minority.size());
    for (std::size_t m = 0; m < minority.size(); ++m)
      keyed[m] = {detail::squared_distance(features[m], km.centroids[km.assignments[m]]), m};
    std::sort(keyed.begin(), keyed.end());
    for (const auto& [d, m] : keyed) cluster_order[km.assignments[m]].push_back(m);
  }

  for (std::size_t b = 0; b < cfg.count_bins.size(); ++b) {
    long deficit = target - static_cast<long>(bin_freq[b]);
    if (deficit <= 0 || bin_freq[b] == 0) continue;
    std::vector<std::size_t> cursor(k, 0);
    bool progressed = true;
    while (deficit > 0 && progressed) {
      progressed = false;
      for (int c = 0; c < k && deficit > 0; ++c) {
        while (cursor[c] < cluster_order[c].size()) {
          const std::size_t m = cluster_order[c][cursor[c]++];
          const std::size_t i = minority[m];
          if (bin_idx[i] != static_cast<int>(b)) continue;
          CellSample copy = samples[i];
          copy.origin = "oversampled";
          result.samples.push_back(std::move(copy));
          --deficit;
          ++result.bin_after[b];
          progressed = true;
          break;
        }
      }
    }
  }
  return result;
}

inline double log_transform(double y) {
  if (y < 0.0) throw std::invalid_argument("log_transform: negative input");
  return std::log1p(y);
}

inline double inverse_log_transform(double t) { return std::expm1(t); }

}  // namespace frogsdm
