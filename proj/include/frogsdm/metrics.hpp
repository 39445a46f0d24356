#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace frogsdm {

enum class Task { Classification, Regression };

inline std::string task_name(Task t) {
  return t == Task::Classification ? "classification" : "regression";
}

struct EvalResult {
  Task task = Task::Regression;
  std::optional<double> mae;
  std::optional<double> accuracy;
  std::optional<double> auc;
  std::size_t n = 0;
};

inline double mae(const std::vector<double>& y, const std::vector<double>& yhat) {
  if (y.size() != yhat.size()) throw std::invalid_argument("mae: length mismatch");
  if (y.empty()) throw std::invalid_argument("mae: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += std::abs(y[i] - yhat[i]);
  return sum / static_cast<double>(y.size());
}

// Fraction of samples where (p >= threshold) matches the label.
inline double accuracy(const std::vector<int>& y, const std::vector<double>& p,
                       double threshold = 0.5) {
  if (y.size() != p.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (y.empty()) throw std::invalid_argument("accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const int pred = p[i] >= threshold ? 1 : 0;
    if (pred == y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(y.size());
}

// Rank-based (Mann-Whitney) AUC; tied scores contribute 0.5. Equals the
// trapezoidal area under the ROC curve.
inline double roc_auc(const std::vector<int>& y, const std::vector<double>& scores) {
  if (y.size() != scores.size()) throw std::invalid_argument("roc_auc: length mismatch");
  const std::size_t n = y.size();
  std::size_t n_pos = 0;
  for (int label : y) n_pos += (label != 0);
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("roc_auc: both classes must be present");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average ranks over tie groups, accumulate ranks of positives.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k)
      if (y[order[k]] != 0) rank_sum_pos += avg_rank;
    i = j;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

}  // namespace frogsdm
