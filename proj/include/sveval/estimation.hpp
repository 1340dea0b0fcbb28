#pragma once

// Design-based estimators: Horvitz-Thompson totals, confusion tallies,
// ratio estimators of sensitivity and specificity with linearization
// standard errors, population truths, and weight diagnostics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sveval/errors.hpp"
#include "sveval/types.hpp"

namespace sveval {

struct WeightedValue {
  double value = 0.0;
  double weight = 1.0;
};

/// Horvitz-Thompson estimate of a population total: sum of w_i * z_i.
inline double ht_total(std::span<const WeightedValue> values) {
  double total = 0.0;
  for (const WeightedValue& v : values) {
    if (!std::isfinite(v.value) || !std::isfinite(v.weight))
      throw DataError("ht_total: non-finite input");
    if (!(v.weight > 0.0)) throw DataError("ht_total: weights must be positive");
    total += v.weight * v.value;
  }
  return total;
}

/// Predicted class under the library-wide convention: positive iff s >= t.
constexpr bool predicts_positive(double score, double threshold) noexcept {
  return score >= threshold;
}

inline void check_threshold(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw DataError("threshold must lie in [0, 1]");
}

/// Classifies every case at threshold t and accumulates both the raw
/// counts and the weighted totals (N-hat_TP = sum w_i* TP_i, ...).
inline ConfusionTally tally_confusion(std::span<const ScoredCase> cases, double threshold) {
  if (cases.empty()) throw DataError("tally_confusion: empty evaluation set");
  check_threshold(threshold);
  ConfusionTally t;
  for (const ScoredCase& c : cases) {
    const bool predicted = predicts_positive(c.score, threshold);
    if (c.outcome == 1) {
      if (predicted) {
        t.tp += c.weight;
        ++t.tp_count;
      } else {
        t.fn += c.weight;
        ++t.fn_count;
      }
    } else {
      if (predicted) {
        t.fp += c.weight;
        ++t.fp_count;
      } else {
        t.tn += c.weight;
        ++t.tn_count;
      }
    }
  }
  return t;
}

inline ConfusionTally tally_confusion(const EvaluationSet& eval, double threshold) {
  return tally_confusion(std::span<const ScoredCase>(eval.cases()), threshold);
}

namespace detail {

inline MetricResult ratio_metric(MetricKind kind, Weighting weighting, double numerator,
                                 double other) {
  const double denominator = numerator + other;
  if (!(denominator > 0.0))
    throw UndefinedMetricError(std::string(to_string(kind)) +
                               " undefined: no records in the denominator class");
  return {kind, weighting, numerator / denominator, std::nullopt};
}

}  // namespace detail

/// TP / (TP + FN), from weighted totals or raw counts.
inline MetricResult sensitivity(const ConfusionTally& t, Weighting weighting) {
  if (weighting == Weighting::unweighted)
    return detail::ratio_metric(MetricKind::sensitivity, weighting,
                                static_cast<double>(t.tp_count), static_cast<double>(t.fn_count));
  return detail::ratio_metric(MetricKind::sensitivity, weighting, t.tp, t.fn);
}

/// TN / (TN + FP), from weighted totals or raw counts.
inline MetricResult specificity(const ConfusionTally& t, Weighting weighting) {
  if (weighting == Weighting::unweighted)
    return detail::ratio_metric(MetricKind::specificity, weighting,
                                static_cast<double>(t.tn_count), static_cast<double>(t.fp_count));
  return detail::ratio_metric(MetricKind::specificity, weighting, t.tn, t.fp);
}

/// Taylor-linearization standard error of the ratio estimator
/// R = X/Y, X = sum w x_i, Y = sum w y_i, under the with-replacement
/// approximation:
///
///   Var(R) ~= (1 / Y^2) * m / (m - 1) * sum (w_i (x_i - R y_i))^2
///
/// with m the number of evaluated records. For sensitivity x_i = TP_i and
/// y_i = 1[outcome = 1]; for specificity x_i = TN_i and y_i = 1[outcome = 0].
/// Unweighted uses w_i = 1. No finite-population correction is applied and
/// strata are ignored.
///
/// Throws UndefinedMetricError when the denominator class has fewer than
/// two records.
inline double ratio_standard_error(std::span<const ScoredCase> cases, double threshold,
                                   MetricKind kind, Weighting weighting = Weighting::weighted) {
  if (kind == MetricKind::auroc) throw DataError("ratio_standard_error: AUROC is not a ratio metric");
  if (cases.empty()) throw DataError("ratio_standard_error: empty evaluation set");
  check_threshold(threshold);
  const int target = kind == MetricKind::sensitivity ? 1 : 0;
  const bool unit = weighting == Weighting::unweighted;

  double x_hat = 0.0, y_hat = 0.0;
  std::size_t class_count = 0;
  for (const ScoredCase& c : cases) {
    if (c.outcome != target) continue;
    const double w = unit ? 1.0 : c.weight;
    ++class_count;
    y_hat += w;
    if (predicts_positive(c.score, threshold) == (target == 1)) x_hat += w;
  }
  if (class_count < 2)
    throw UndefinedMetricError(std::string(to_string(kind)) +
                               " standard error undefined: fewer than two records in the "
                               "denominator class");
  const double ratio = x_hat / y_hat;
  double ss = 0.0;
  for (const ScoredCase& c : cases) {
    if (c.outcome != target) continue;  // residual is zero outside the denominator class
    const double w = unit ? 1.0 : c.weight;
    const double x = predicts_positive(c.score, threshold) == (target == 1) ? 1.0 : 0.0;
    const double r = w * (x - ratio);
    ss += r * r;
  }
  const auto m = static_cast<double>(cases.size());
  return std::sqrt(ss * m / (m - 1.0)) / y_hat;
}

/// Sensitivity or specificity at a threshold with its linearization SE
/// attached when defined.
inline MetricResult estimate_metric(std::span<const ScoredCase> cases, double threshold,
                                    MetricKind kind, Weighting weighting) {
  if (kind == MetricKind::auroc) throw DataError("estimate_metric: AUROC is not a ratio metric");
  const ConfusionTally t = tally_confusion(cases, threshold);
  MetricResult result = kind == MetricKind::sensitivity ? sensitivity(t, weighting)
                                                        : specificity(t, weighting);
  try {
    result.standard_error = ratio_standard_error(cases, threshold, kind, weighting);
  } catch (const UndefinedMetricError&) {
    result.standard_error.reset();
  }
  return result;
}

struct PopulationTruth {
  double sensitivity = 0.0;
  double specificity = 0.0;
  ConfusionTally tally;
};

/// Finite-population SN and SP by direct count over every record
/// (case weights are ignored). Throws UndefinedMetricError if a class is
/// absent.
inline PopulationTruth population_truth(std::span<const ScoredCase> predictions, double threshold) {
  PopulationTruth truth;
  truth.tally = tally_confusion(predictions, threshold);
  truth.sensitivity = sensitivity(truth.tally, Weighting::unweighted).value;
  truth.specificity = specificity(truth.tally, Weighting::unweighted).value;
  return truth;
}

struct WeightDiagnostics {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;  // divisor n
  double cv = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::array<double, 9> deciles{};  // 10th..90th percentiles
};

/// Quantile with linear interpolation between order statistics (the
/// common "type 7" definition). `sorted` must be ascending and non-empty.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline WeightDiagnostics weight_diagnostics(std::span<const double> weights) {
  if (weights.empty()) throw DataError("weight_diagnostics: no weights");
  std::vector<double> sorted(weights.begin(), weights.end());
  std::sort(sorted.begin(), sorted.end());
  WeightDiagnostics d;
  d.count = sorted.size();
  const auto n = static_cast<double>(d.count);
  double sum = 0.0;
  for (double w : sorted) sum += w;
  d.mean = sum / n;
  double ss = 0.0;
  for (double w : sorted) ss += (w - d.mean) * (w - d.mean);
  d.sd = std::sqrt(ss / n);
  d.cv = d.sd / d.mean;
  d.min = sorted.front();
  d.max = sorted.back();
  for (std::size_t k = 0; k < d.deciles.size(); ++k)
    d.deciles[k] = quantile_sorted(sorted, static_cast<double>(k + 1) / 10.0);
  return d;
}

}  // namespace sveval
