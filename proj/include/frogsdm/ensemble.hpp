#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "frogsdm/csv.hpp"
#include "frogsdm/metrics.hpp"

namespace frogsdm {

struct EnsembleWeights {
  std::array<double, 3> w = {0.3, 0.3, 0.4};
};

inline void validate_weights(const EnsembleWeights& weights) {
  double sum = 0.0;
  for (double v : weights.w) {
    if (v < -1e-9 || v > 1.0 + 1e-9)
      throw std::invalid_argument("ensemble: weight " + fmt_double(v) + " outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("ensemble: weights sum to " + fmt_double(sum) + ", expected 1");
}

inline double ensemble_predict(const EnsembleWeights& weights, const std::array<double, 3>& preds) {
  const double sum = weights.w[0] + weights.w[1] + weights.w[2];
  if (sum == 0.0) throw std::invalid_argument("ensemble: all-zero weights");
  return (weights.w[0] * preds[0] + weights.w[1] * preds[1] + weights.w[2] * preds[2]) / sum;
}

// Euclidean projection onto the probability simplex (sort-based): tau is the
// threshold from the largest prefix whose shifted values stay positive.
inline std::array<double, 3> project_to_simplex(std::array<double, 3> v) {
  std::array<double, 3> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0;
  double tau = 0.0;
  for (int i = 0; i < 3; ++i) {
    css += u[i];
    const double t = (css - 1.0) / (i + 1);
    if (u[i] - t > 0.0) tau = t;
  }
  for (double& x : v) x = std::max(0.0, x - tau);
  return v;
}

struct OptimizeResult {
  EnsembleWeights weights;
  double mae = 0.0;
  int iterations = 0;
};

namespace detail {

inline double ensemble_mae(const std::vector<std::array<double, 3>>& preds,
                           const std::vector<double>& truth, const std::array<double, 3>& w) {
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double p = w[0] * preds[i][0] + w[1] * preds[i][1] + w[2] * preds[i][2];
    total += std::abs(p - truth[i]);
  }
  return total / static_cast<double>(preds.size());
}

}  // namespace detail

// Minimize MAE of the weighted average over the probability simplex.
// Projected subgradient from the fixed (0.3, 0.3, 0.4) start, followed by a
// pattern-search polish along pairwise weight-exchange directions; the MAE
// objective is convex, so the polish closes in on the global optimum.
inline OptimizeResult optimize_weights(const std::vector<std::array<double, 3>>& preds,
                                       const std::vector<double>& truth,
                                       std::uint64_t /*seed*/ = 0) {
  if (preds.empty() || preds.size() != truth.size())
    throw std::invalid_argument("optimize_weights: bad input sizes");
  for (const auto& row : preds)
    for (double v : row)
      if (!std::isfinite(v)) throw std::invalid_argument("optimize_weights: non-finite prediction");
  for (double v : truth)
    if (!std::isfinite(v)) throw std::invalid_argument("optimize_weights: non-finite truth");

  const double inv_n = 1.0 / static_cast<double>(preds.size());
  auto objective = [&](const std::array<double, 3>& w) {
    return detail::ensemble_mae(preds, truth, w);
  };

  std::array<double, 3> w = {0.3, 0.3, 0.4};
  std::array<double, 3> best = w;
  double best_f = objective(w);
  double f_cur = best_f;
  double step = 0.05;
  int iterations = 0;

  for (int it = 0; it < 500; ++it) {
    ++iterations;
    std::array<double, 3> g = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const double e =
          w[0] * preds[i][0] + w[1] * preds[i][1] + w[2] * preds[i][2] - truth[i];
      const double sgn = e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0);
      for (int j = 0; j < 3; ++j) g[j] += sgn * preds[i][j] * inv_n;
    }
    std::array<double, 3> next = {w[0] - step * g[0], w[1] - step * g[1], w[2] - step * g[2]};
    next = project_to_simplex(next);
    const double f_next = objective(next);
    if (f_next < best_f) {
      best_f = f_next;
      best = next;
    }
    if (f_next >= f_cur) {
      step *= 0.5;
      if (step < 1e-10) break;
    }
    w = next;
    f_cur = f_next;
  }

  // Vertices can beat a stalled subgradient run on degenerate instances.
  for (int j = 0; j < 3; ++j) {
    std::array<double, 3> vertex = {0.0, 0.0, 0.0};
    vertex[j] = 1.0;
    const double f = objective(vertex);
    if (f < best_f) {
      best_f = f;
      best = vertex;
    }
  }

  // Pattern search along +-(e_j - e_k), halving the radius on failure.
  for (double h = 0.05; h >= 1e-9;) {
    bool improved = false;
    for (int j = 0; j < 3 && !improved; ++j) {
      for (int k = 0; k < 3 && !improved; ++k) {
        if (j == k) continue;
        std::array<double, 3> cand = best;
        cand[j] += h;
        cand[k] -= h;
        if (cand[j] > 1.0 || cand[k] < 0.0) continue;
        const double f = objective(cand);
        if (f < best_f - 1e-15) {
          best_f = f;
          best = cand;
          improved = true;
        }
      }
    }
    if (!improved) h *= 0.5;
  }

  OptimizeResult result;
  result.weights.w = project_to_simplex(best);
  result.mae = objective(result.weights.w);
  result.iterations = iterations;
  return result;
}

inline void write_weights_csv(const EnsembleWeights& weights, const std::filesystem::path& path) {
  static const char* names[3] = {"rgb", "lc", "ndvi"};
  CsvWriter out(path, {"model", "weight"});
  for (int i = 0; i < 3; ++i) out.row({names[i], fmt_double(weights.w[i])});
}

inline EnsembleWeights read_weights_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t c_model = table.column("model");
  const std::size_t c_weight = table.column("weight");
  EnsembleWeights weights;
  bool seen[3] = {false, false, false};
  for (const auto& row : table.rows) {
    int idx;
    if (row[c_model] == "rgb") idx = 0;
    else if (row[c_model] == "lc") idx = 1;
    else if (row[c_model] == "ndvi") idx = 2;
    else throw std::runtime_error("weights file: unknown model '" + row[c_model] + "'");
    weights.w[idx] = parse_double(row[c_weight]);
    seen[idx] = true;
  }
  if (!seen[0] || !seen[1] || !seen[2])
    throw std::runtime_error("weights file " + path.string() + " is missing a model row");
  return weights;
}

}  // namespace frogsdm
