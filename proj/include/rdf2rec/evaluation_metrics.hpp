#pragma once

#include <algorithm>
#include <numeric>
#include <span>

#include "rdf2rec/common.hpp"

namespace rdf2rec {

struct MetricsReport {
  double f1 = 0.0, precision = 0.0, recall = 0.0, auc = 0.0;
  long tp = 0, fp = 0, tn = 0, fn = 0;
  std::string config_fingerprint;

  // f1 = harmonic mean of precision and recall; counts consistent
  void assert_consistent() const {
    double expected =
        (precision + recall) > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    if (std::abs(f1 - expected) > 1e-12)
      throw NumericError("MetricsReport f1 inconsistent with precision/recall");
    double p = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    double r = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    if (std::abs(p - precision) > 1e-12 || std::abs(r - recall) > 1e-12)
      throw NumericError("MetricsReport counts inconsistent with precision/recall");
  }
};

// Confusion-matrix metrics at a decision threshold.
inline MetricsReport compute_threshold_metrics(std::span<const double> probs,
                                               std::span<const double> labels,
                                               double threshold = 0.5) {
  if (probs.size() != labels.size())
    throw ShapeError("compute_threshold_metrics: lengths differ");
  if (probs.empty()) throw ShapeError("compute_threshold_metrics: empty input");
  MetricsReport m;
  for (size_t i = 0; i < probs.size(); ++i) {
    bool predicted = probs[i] >= threshold;
    bool actual = labels[i] >= 0.5;
    if (predicted && actual)
      ++m.tp;
    else if (predicted && !actual)
      ++m.fp;
    else if (!predicted && actual)
      ++m.fn;
    else
      ++m.tn;
  }
  m.precision = (m.tp + m.fp) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
  m.recall = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  m.assert_consistent();
  return m;
}

// Exact rank-based ROC-AUC (Mann-Whitney): the probability that a uniformly
// chosen positive outranks a uniformly chosen negative, ties counted half.
inline double compute_auc(std::span<const double> probs, std::span<const double> labels) {
  if (probs.size() != labels.size()) throw ShapeError("compute_auc: lengths differ");
  if (probs.empty()) throw ShapeError("compute_auc: empty input");
  const size_t n = probs.size();
  long p_count = 0, n_count = 0;
  for (size_t i = 0; i < n; ++i) (labels[i] >= 0.5 ? p_count : n_count)++;
  if (p_count == 0 || n_count == 0)
    throw DataError("compute_auc needs at least one positive and one negative label");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return probs[a] < probs[b]; });

  // average ranks within tie groups, sum ranks of positives
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && probs[order[j]] == probs[order[i]]) ++j;
    double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (size_t k = i; k < j; ++k)
      if (labels[order[k]] >= 0.5) pos_rank_sum += avg_rank;
    i = j;
  }
  double u = pos_rank_sum - static_cast<double>(p_count) * (p_count + 1) / 2.0;
  return u / (static_cast<double>(p_count) * static_cast<double>(n_count));
}

}  // namespace rdf2rec
