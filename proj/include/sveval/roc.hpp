#pragma once

// ROC curves over a threshold grid and trapezoidal AUROC, weighted or
// unweighted.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sveval/errors.hpp"
#include "sveval/estimation.hpp"
#include "sveval/types.hpp"

namespace sveval {

struct RocPoint {
  double threshold = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;

  double fpr() const noexcept { return 1.0 - specificity; }
};

struct RocCurve {
  std::vector<RocPoint> points;  // threshold ascending
  Weighting weighting = Weighting::weighted;
};

/// How the decision thresholds are chosen.
struct GridSpec {
  enum class Mode { uniform, exact };
  Mode mode = Mode::uniform;
  std::size_t points = 101;  // uniform mode only

  std::string describe() const {
    return mode == Mode::exact ? "exact" : "uniform-" + std::to_string(points);
  }
};

/// `points` evenly spaced thresholds from 0 to 1 inclusive.
inline std::vector<double> uniform_grid(std::size_t points = 101) {
  if (points < 2) throw DataError("uniform grid needs at least two points");
  std::vector<double> grid(points);
  const auto last = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = static_cast<double>(i) / last;
  return grid;
}

/// 0, the midpoints between consecutive distinct scores, and 1. Every
/// distinct operating point of the classifier is visited.
inline std::vector<double> exact_grid(std::span<const ScoredCase> cases) {
  std::vector<double> scores;
  scores.reserve(cases.size());
  for (const ScoredCase& c : cases) scores.push_back(c.score);
  std::sort(scores.begin(), scores.end());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
  std::vector<double> grid{0.0};
  for (std::size_t i = 0; i + 1 < scores.size(); ++i) {
    const double mid = 0.5 * (scores[i] + scores[i + 1]);
    // Keep mid strictly above the lower score so the cut separates them.
    grid.push_back(mid > scores[i] ? mid : scores[i + 1]);
  }
  grid.push_back(1.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

inline std::vector<double> make_grid(const GridSpec& spec, std::span<const ScoredCase> cases) {
  return spec.mode == GridSpec::Mode::exact ? exact_grid(cases) : uniform_grid(spec.points);
}

/// One (SN, SP) pair per threshold. Equivalent to tally_confusion plus
/// sensitivity/specificity at each grid value, computed from one sort and
/// cumulative class weights. Weighting::unweighted counts records;
/// the other modes use the case weights.
inline RocCurve roc_sweep(std::span<const ScoredCase> cases, std::span<const double> grid,
                          Weighting weighting) {
  if (grid.empty() || grid.front() != 0.0 || grid.back() != 1.0)
    throw DataError("threshold grid must start at 0 and end at 1");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1])) throw DataError("threshold grid must be strictly increasing");

  std::vector<std::size_t> order(cases.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cases[a].score < cases[b].score;
  });

  const std::size_t n = cases.size();
  const bool unit = weighting == Weighting::unweighted;
  std::vector<double> sorted_scores(n);
  std::vector<double> neg_below(n + 1, 0.0);  // negatives' weight among the first k
  std::vector<double> pos_above(n + 1, 0.0);  // positives' weight from k onward
  for (std::size_t k = 0; k < n; ++k) {
    const ScoredCase& c = cases[order[k]];
    sorted_scores[k] = c.score;
    neg_below[k + 1] = neg_below[k] + (c.outcome == 0 ? (unit ? 1.0 : c.weight) : 0.0);
  }
  for (std::size_t k = n; k-- > 0;) {
    const ScoredCase& c = cases[order[k]];
    pos_above[k] = pos_above[k + 1] + (c.outcome == 1 ? (unit ? 1.0 : c.weight) : 0.0);
  }
  const double positives = pos_above[0];
  const double negatives = neg_below[n];
  if (!(positives > 0.0) || !(negatives > 0.0))
    throw UndefinedMetricError("ROC curve undefined: both outcome classes must be present");

  RocCurve curve;
  curve.weighting = weighting;
  curve.points.reserve(grid.size());
  for (double t : grid) {
    // Cases before k score below t and are predicted negative.
    const auto k = static_cast<std::size_t>(
        std::lower_bound(sorted_scores.begin(), sorted_scores.end(), t) - sorted_scores.begin());
    curve.points.push_back({t, pos_above[k] / positives, neg_below[k] / negatives});
  }
  return curve;
}

/// Trapezoidal area under sensitivity against 1 - specificity, with the
/// points sorted by false-positive rate and anchored at (0,0) and (1,1).
inline double auroc(const RocCurve& curve) {
  std::vector<std::pair<double, double>> xy;
  xy.reserve(curve.points.size() + 2);
  xy.emplace_back(0.0, 0.0);
  for (const RocPoint& p : curve.points) xy.emplace_back(p.fpr(), p.sensitivity);
  xy.emplace_back(1.0, 1.0);
  std::sort(xy.begin(), xy.end());
  double area = 0.0;
  for (std::size_t i = 1; i < xy.size(); ++i)
    area += (xy[i].first - xy[i - 1].first) * 0.5 * (xy[i].second + xy[i - 1].second);
  return std::clamp(area, 0.0, 1.0);
}

inline double auroc(std::span<const ScoredCase> cases, const GridSpec& grid, Weighting weighting) {
  const std::vector<double> thresholds = make_grid(grid, cases);
  return auroc(roc_sweep(cases, thresholds, weighting));
}

}  // namespace sveval
