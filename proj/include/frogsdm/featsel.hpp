#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "frogsdm/csv.hpp"
#include "frogsdm/rng.hpp"

namespace frogsdm {

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 8;
  double bootstrap_fraction = 1.0;
  int features_per_split = 0;  // 0 = ceil(F / 3)
  int min_samples_split = 2;
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  double value = 0.0;  // leaf prediction
  int left = -1;
  int right = -1;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(const std::vector<double>& x) const {
    int i = 0;
    while (nodes[i].feature >= 0)
      i = x[nodes[i].feature] < nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].value;
  }
};

struct RandomForest {
  ForestConfig cfg;
  std::vector<RegressionTree> trees;
  std::vector<double> importance;  // per feature, sums to 1 (or all zero)

  double predict(const std::vector<double>& x) const {
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return s / static_cast<double>(trees.size());
  }
};

namespace detail {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;  // variance reduction as SSE decrease
};

// Best variance-reduction split over the candidate features; ties resolve to
// the lowest feature index, then the lowest threshold.
inline SplitChoice best_split(const std::vector<std::vector<double>>& X,
                              const std::vector<double>& y, const std::vector<std::size_t>& idx,
                              const std::vector<int>& features) {
  const std::size_t n = idx.size();
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i : idx) {
    sum += y[i];
    sumsq += y[i] * y[i];
  }
  const double parent_sse = sumsq - sum * sum / static_cast<double>(n);

  SplitChoice best;
  std::vector<std::pair<double, double>> vals(n);  // (x, y)
  for (int f : features) {
    for (std::size_t j = 0; j < n; ++j) vals[j] = {X[idx[j]][f], y[idx[j]]};
    std::sort(vals.begin(), vals.end());
    double left_sum = 0.0, left_sumsq = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      left_sum += vals[j].second;
      left_sumsq += vals[j].second * vals[j].second;
      if (vals[j].first == vals[j + 1].first) continue;
      const double nl = static_cast<double>(j + 1);
      const double nr = static_cast<double>(n - j - 1);
      const double right_sum = sum - left_sum;
      const double right_sumsq = sumsq - left_sumsq;
      const double sse = (left_sumsq - left_sum * left_sum / nl) +
                         (right_sumsq - right_sum * right_sum / nr);
      const double gain = parent_sse - sse;
      if (gain > best.gain + 1e-12) {
        best.gain = gain;
        best.feature = f;
        best.threshold = 0.5 * (vals[j].first + vals[j + 1].first);
      }
    }
  }
  return best;
}

inline int build_node(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                      std::vector<std::size_t>& idx, int depth, const ForestConfig& cfg,
                      int n_features, Rng& rng, RegressionTree& tree,
                      std::vector<double>& importance) {
  const int node_id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  double mean = 0.0;
  for (std::size_t i : idx) mean += y[i];
  mean /= static_cast<double>(idx.size());
  tree.nodes[node_id].value = mean;

  if (depth >= cfg.max_depth || idx.size() < static_cast<std::size_t>(cfg.min_samples_split))
    return node_id;

  int m = cfg.features_per_split > 0
              ? std::min(cfg.features_per_split, n_features)
              : (n_features + 2) / 3;
  std::vector<int> features;
  if (m >= n_features) {
    features.resize(n_features);
    std::iota(features.begin(), features.end(), 0);
  } else {
    for (std::size_t i : rng.sample_without_replacement(static_cast<std::size_t>(n_features),
                                                        static_cast<std::size_t>(m)))
      features.push_back(static_cast<int>(i));
    std::sort(features.begin(), features.end());
  }

  const SplitChoice split = best_split(X, y, idx, features);
  if (split.feature < 0) return node_id;
  importance[split.feature] += split.gain;

  std::vector<std::size_t> left_idx, right_idx;
  for (std::size_t i : idx)
    (X[i][split.feature] < split.threshold ? left_idx : right_idx).push_back(i);
  idx.clear();
  idx.shrink_to_fit();

  tree.nodes[node_id].feature = split.feature;
  tree.nodes[node_id].threshold = split.threshold;
  tree.nodes[node_id].left = build_node(X, y, left_idx, depth + 1, cfg, n_features, rng, tree,
                                        importance);
  tree.nodes[node_id].right = build_node(X, y, right_idx, depth + 1, cfg, n_features, rng, tree,
                                         importance);
  return node_id;
}

}  // namespace detail

inline RandomForest fit_random_forest(const std::vector<std::vector<double>>& X,
                                      const std::vector<double>& y, const ForestConfig& cfg) {
  if (X.size() < 2 || X.size() != y.size())
    throw std::invalid_argument("forest: need N >= 2 with matching labels");
  const int n_features = static_cast<int>(X[0].size());
  if (n_features < 1) throw std::invalid_argument("forest: need at least one feature");
  for (const auto& row : X)
    if (static_cast<int>(row.size()) != n_features)
      throw std::invalid_argument("forest: ragged feature matrix");
  if (cfg.n_trees < 1 || cfg.max_depth < 1)
    throw std::invalid_argument("forest: n_trees and max_depth must be >= 1");
  if (!(cfg.bootstrap_fraction > 0.0) || !std::isfinite(cfg.bootstrap_fraction))
    throw std::invalid_argument("forest: bootstrap_fraction must be positive");

  RandomForest forest;
  forest.cfg = cfg;
  forest.importance.assign(n_features, 0.0);
  Rng root_rng(cfg.seed);

  const std::size_t n_boot = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg.bootstrap_fraction * static_cast<double>(X.size()))));
  for (int t = 0; t < cfg.n_trees; ++t) {
    Rng rng = root_rng.fork(static_cast<std::uint64_t>(t));
    std::vector<std::size_t> idx(n_boot);
    for (std::size_t i = 0; i < n_boot; ++i) idx[i] = rng.uniform_index(X.size());
    RegressionTree tree;
    detail::build_node(X, y, idx, 0, cfg, n_features, rng, tree, forest.importance);
    forest.trees.push_back(std::move(tree));
  }

  const double total = std::accumulate(forest.importance.begin(), forest.importance.end(), 0.0);
  if (total > 0.0)
    for (double& v : forest.importance) v /= total;
  else
    std::fill(forest.importance.begin(), forest.importance.end(), 0.0);
  return forest;
}

struct ImportanceEntry {
  std::string feature;
  double importance = 0.0;
};

struct RfeReport {
  std::vector<ImportanceEntry> ranking;       // retained features, descending importance
  std::vector<std::string> eliminated_order;  // dropped first -> last
  std::vector<int> retained_indices;          // into the original feature list
};

// Fit, drop the lowest-importance feature, refit, until `keep` remain.
// Ties eliminate the lowest original index.
inline RfeReport rfe(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                     const std::vector<std::string>& feature_names, int keep,
                     const ForestConfig& cfg) {
  const int n_features = X.empty() ? 0 : static_cast<int>(X[0].size());
  if (static_cast<int>(feature_names.size()) != n_features)
    throw std::invalid_argument("rfe: feature name count mismatch");
  if (keep < 1 || keep > n_features)
    throw std::invalid_argument("rfe: keep must be in [1, " + std::to_string(n_features) + "]");

  std::vector<int> active(n_features);
  std::iota(active.begin(), active.end(), 0);
  RfeReport report;

  std::vector<double> importance;
  while (true) {
    std::vector<std::vector<double>> sub(X.size(), std::vector<double>(active.size()));
    for (std::size_t i = 0; i < X.size(); ++i)
      for (std::size_t j = 0; j < active.size(); ++j) sub[i][j] = X[i][active[j]];
    const RandomForest forest = fit_random_forest(sub, y, cfg);
    importance = forest.importance;
    if (static_cast<int>(active.size()) <= keep) break;
    std::size_t worst = 0;
    for (std::size_t j = 1; j < active.size(); ++j)
      if (importance[j] < importance[worst]) worst = j;
    report.eliminated_order.push_back(feature_names[active[worst]]);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(worst));
  }

  std::vector<std::size_t> order(active.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return importance[a] > importance[b]; });
  for (std::size_t j : order) {
    report.ranking.push_back({feature_names[active[j]], importance[j]});
    report.retained_indices.push_back(active[j]);
  }
  return report;
}

inline void write_importance_csv(const RfeReport& report, const std::filesystem::path& path) {
  CsvWriter out(path, {"rank", "feature", "importance"});
  for (std::size_t i = 0; i < report.ranking.size(); ++i)
    out.row({std::to_string(i + 1), report.ranking[i].feature,
             fmt_double(report.ranking[i].importance)});
}

}  // namespace frogsdm
