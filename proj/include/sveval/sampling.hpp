#pragma once

// Probability samplers (stratified SRS without replacement) and the
// simple-random train/test split with compound evaluation weights.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "sveval/errors.hpp"
#include "sveval/rng.hpp"
#include "sveval/types.hpp"

namespace sveval {

/// Per-stratum sample sizes n_h keyed by stratum label.
struct StratifiedDesign {
  std::map<std::string, std::size_t> allocations;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& [label, n_h] : allocations) n += n_h;
    return n;
  }

  /// Throws DataError on an unknown stratum label, n_h == 0 or n_h > N_h.
  void validate(const FinitePopulation& population) const {
    if (allocations.empty()) throw DataError("design has no strata");
    for (const auto& [label, n_h] : allocations) {
      auto it = population.strata().find(label);
      if (it == population.strata().end()) throw DataError("unknown stratum label '" + label + "'");
      if (n_h == 0) throw DataError("stratum '" + label + "' has zero allocation");
      if (n_h > it->second.size())
        throw DataError("stratum '" + label + "': allocation " + std::to_string(n_h) +
                        " exceeds stratum size " + std::to_string(it->second.size()));
    }
  }
};

/// Round half to even, the rule used for the evaluation-set size.
inline std::size_t round_half_even(double x) {
  const double r = std::nearbyint(x);  // default rounding mode: to nearest, ties to even
  return r <= 0.0 ? 0 : static_cast<std::size_t>(r);
}

namespace detail {

/// Draws k of the given items without replacement (partial Fisher-Yates)
/// and returns them in ascending order.
inline std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t> items,
                                                         std::size_t k, Rng& rng) {
  const std::size_t n = items.size();
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.index(n - i));
    std::swap(items[i], items[j]);
  }
  items.resize(k);
  std::sort(items.begin(), items.end());
  return items;
}

}  // namespace detail

/// Independent SRS without replacement of n_h records within each stratum.
/// Each member carries pi = n_h / N_h and w = 1 / pi. Members are ordered
/// by population row.
inline SurveySample stratified_sample(const FinitePopulation& population,
                                      const StratifiedDesign& design, Rng& rng) {
  design.validate(population);
  SurveySample sample;
  sample.members.reserve(design.total());
  for (const auto& [label, n_h] : design.allocations) {
    const std::vector<std::size_t>& rows = population.strata().at(label);
    const double pi = static_cast<double>(n_h) / static_cast<double>(rows.size());
    for (std::size_t row : detail::draw_without_replacement(rows, n_h, rng))
      sample.members.push_back({population[row].id, row, 1.0 / pi, pi});
  }
  std::sort(sample.members.begin(), sample.members.end(),
            [](const SampleMember& a, const SampleMember& b) { return a.row < b.row; });
  return sample;
}

/// SRS without replacement of n records from the whole population.
inline SurveySample simple_random_sample(const FinitePopulation& population, std::size_t n,
                                         Rng& rng) {
  if (n == 0 || n > population.size())
    throw DataError("sample size must be in [1, " + std::to_string(population.size()) + "]");
  std::vector<std::size_t> rows(population.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const double pi = static_cast<double>(n) / static_cast<double>(population.size());
  SurveySample sample;
  sample.members.reserve(n);
  for (std::size_t row : detail::draw_without_replacement(std::move(rows), n, rng))
    sample.members.push_back({population[row].id, row, 1.0 / pi, pi});
  return sample;
}

/// pi_i* = pi_i * (n_e / n): probability of entering the evaluation set.
inline double inclusion_probability_of_evaluation(std::size_t sample_size, std::size_t eval_size,
                                                  double inclusion_probability) {
  if (eval_size == 0 || eval_size > sample_size)
    throw DataError("evaluation size must be in [1, sample size]");
  if (!(inclusion_probability > 0.0 && inclusion_probability <= 1.0))
    throw DataError("inclusion probability must lie in (0, 1]");
  return inclusion_probability *
         (static_cast<double>(eval_size) / static_cast<double>(sample_size));
}

struct EvaluationMember {
  std::string id;
  std::size_t row = 0;
  double weight = 1.0;           // original design weight w_i
  double compound_weight = 1.0;  // w_i * (n / n_e)
};

struct TrainTestSplit {
  SurveySample training;                     // original weights retained
  std::vector<EvaluationMember> evaluation;  // compound weights attached
  std::size_t sample_size = 0;
  std::size_t eval_size = 0;
  double weight_factor = 1.0;  // n / n_e
};

/// Splits a sample by drawing an SRS of n_e = round(f * n) evaluation
/// members (ties to even); the complement is the training set. Both parts
/// keep the sample's member order.
inline TrainTestSplit split_train_test(const SurveySample& sample, double eval_fraction, Rng& rng) {
  if (!(eval_fraction > 0.0 && eval_fraction < 1.0))
    throw DataError("evaluation fraction must lie in (0, 1)");
  const std::size_t n = sample.size();
  const std::size_t n_e = round_half_even(eval_fraction * static_cast<double>(n));
  if (n_e == 0 || n_e >= n)
    throw DataError("degenerate split: " + std::to_string(n_e) + " of " + std::to_string(n) +
                    " records in the evaluation set");

  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  const std::vector<std::size_t> chosen =
      detail::draw_without_replacement(std::move(positions), n_e, rng);

  TrainTestSplit split;
  split.sample_size = n;
  split.eval_size = n_e;
  split.weight_factor = static_cast<double>(n) / static_cast<double>(n_e);
  split.evaluation.reserve(n_e);
  split.training.members.reserve(n - n_e);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const SampleMember& m = sample.members[i];
    if (next < chosen.size() && chosen[next] == i) {
      split.evaluation.push_back({m.id, m.row, m.weight, m.weight * split.weight_factor});
      ++next;
    } else {
      split.training.members.push_back(m);
    }
  }
  return split;
}

}  // namespace sveval
