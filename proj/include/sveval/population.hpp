#pragma once

// Synthetic finite populations: strata drawn from fixed proportions,
// covariates from per-stratum generators, and a binary outcome from a
// logistic model over the covariates.

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sveval/errors.hpp"
#include "sveval/logistic.hpp"
#include "sveval/rng.hpp"
#include "sveval/types.hpp"

namespace sveval {

struct CovariateSpec {
  enum class Kind { uniform, bernoulli, categorical };

  std::string name;
  Kind kind = Kind::uniform;
  // Per-stratum parameters; a single entry applies to every stratum.
  std::vector<std::pair<double, double>> ranges;        // uniform
  std::vector<double> rates;                            // bernoulli
  std::vector<std::string> levels;                      // categorical
  std::vector<std::vector<double>> level_probabilities;  // categorical

  FeatureKind feature_kind() const {
    return kind == Kind::categorical ? FeatureKind::categorical : FeatureKind::numeric;
  }
};

/// Linear predictor intercept + sum of coefficient * covariate. Numeric
/// covariates are keyed by name, categorical levels by "name=level"
/// (levels without a coefficient contribute zero).
struct OutcomeModel {
  double intercept = 0.0;
  std::map<std::string, double> coefficients;
};

struct PopulationSpec {
  std::size_t size = 0;
  std::vector<std::string> strata;
  std::vector<double> proportions;
  std::vector<CovariateSpec> covariates;
  OutcomeModel outcome;

  /// Throws DataError describing the first violated constraint.
  void validate() const {
    if (size == 0) throw DataError("population size must be at least 1");
    if (strata.empty() || strata.size() != proportions.size())
      throw DataError("population: one proportion per stratum is required");
    double sum = 0.0;
    for (double p : proportions) {
      if (!(p >= 0.0 && p <= 1.0)) throw DataError("population: stratum proportion outside [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DataError("population: stratum proportions must sum to 1");
    const std::size_t h = strata.size();
    auto per_stratum = [h](std::size_t count) { return count == 1 || count == h; };
    std::map<std::string, bool> known;
    for (const CovariateSpec& c : covariates) {
      if (c.name.empty()) throw DataError("population: covariate without a name");
      switch (c.kind) {
        case CovariateSpec::Kind::uniform:
          if (!per_stratum(c.ranges.size()))
            throw DataError("covariate " + c.name + ": need 1 or " + std::to_string(h) + " ranges");
          for (const auto& [lo, hi] : c.ranges)
            if (!(std::isfinite(lo) && std::isfinite(hi) && lo <= hi))
              throw DataError("covariate " + c.name + ": invalid range");
          known[c.name] = true;
          break;
        case CovariateSpec::Kind::bernoulli:
          if (!per_stratum(c.rates.size()))
            throw DataError("covariate " + c.name + ": need 1 or " + std::to_string(h) + " rates");
          for (double r : c.rates)
            if (!(r >= 0.0 && r <= 1.0)) throw DataError("covariate " + c.name + ": rate outside [0, 1]");
          known[c.name] = true;
          break;
        case CovariateSpec::Kind::categorical:
          if (c.levels.empty()) throw DataError("covariate " + c.name + ": no levels");
          if (!per_stratum(c.level_probabilities.size()))
            throw DataError("covariate " + c.name + ": need 1 or " + std::to_string(h) +
                            " probability vectors");
          for (const auto& probs : c.level_probabilities) {
            if (probs.size() != c.levels.size())
              throw DataError("covariate " + c.name + ": one probability per level");
            double s = 0.0;
            for (double p : probs) {
              if (!(p >= 0.0 && p <= 1.0)) throw DataError("covariate " + c.name + ": probability outside [0, 1]");
              s += p;
            }
            if (std::abs(s - 1.0) > 1e-9) throw DataError("covariate " + c.name + ": probabilities must sum to 1");
          }
          for (const std::string& level : c.levels) known[c.name + "=" + level] = true;
          break;
      }
    }
    for (const auto& [key, coef] : outcome.coefficients) {
      if (!known.count(key)) throw DataError("outcome model references unknown covariate '" + key + "'");
      if (!std::isfinite(coef)) throw DataError("outcome coefficient for '" + key + "' is not finite");
    }
    if (!std::isfinite(outcome.intercept)) throw DataError("outcome intercept is not finite");
  }

  std::vector<FeatureSpec> feature_specs() const {
    std::vector<FeatureSpec> specs;
    for (const CovariateSpec& c : covariates) specs.push_back({c.name, c.feature_kind()});
    return specs;
  }

  /// Five age strata with an age-dependent smoking rate and an outcome
  /// driven by age, sex and smoking. Prevalence rises with age.
  static PopulationSpec synthetic_default(std::size_t n = 116761) {
    PopulationSpec spec;
    spec.size = n;
    spec.strata = {"19-25", "25-34", "34-54", "54-65", "65-100"};
    // published bin probabilities total 0.99; rescaled to sum to 1
    spec.proportions = {0.11, 0.16, 0.33, 0.17, 0.22};
    for (double& p : spec.proportions) p /= 0.99;
    CovariateSpec age{"age", CovariateSpec::Kind::uniform, {{19, 25}, {25, 34}, {34, 54}, {54, 65}, {65, 100}}, {}, {}, {}};
    CovariateSpec sex{"sex", CovariateSpec::Kind::bernoulli, {}, {0.5}, {}, {}};
    CovariateSpec smoker{"smoker", CovariateSpec::Kind::bernoulli, {}, {0.074, 0.14, 0.15, 0.15, 0.09}, {}, {}};
    spec.covariates = {age, sex, smoker};
    spec.outcome.intercept = -1.25;
    spec.outcome.coefficients = {{"age", 0.04}, {"sex", -1.03}, {"smoker", 0.43}};
    return spec;
  }
};

namespace detail {

template <class T>
const T& for_stratum(const std::vector<T>& values, std::size_t stratum) {
  return values.size() == 1 ? values.front() : values[stratum];
}

inline std::size_t draw_category(std::span<const double> probabilities, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t k = 0; k + 1 < probabilities.size(); ++k) {
    cumulative += probabilities[k];
    if (u < cumulative) return k;
  }
  return probabilities.size() - 1;
}

}  // namespace detail

/// Draws N records: stratum, then each covariate from its stratum's
/// generator, then y ~ Bernoulli(inverse_logit(linear predictor)).
inline FinitePopulation generate_population(const PopulationSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<Record> records;
  records.reserve(spec.size);
  const std::size_t width = std::to_string(spec.size).size();
  for (std::size_t i = 0; i < spec.size; ++i) {
    Record r;
    std::string id = std::to_string(i + 1);
    r.id = "p" + std::string(width - id.size(), '0') + id;
    const std::size_t h = detail::draw_category(spec.proportions, rng);
    r.stratum = spec.strata[h];
    double eta = spec.outcome.intercept;
    r.features.reserve(spec.covariates.size());
    for (const CovariateSpec& c : spec.covariates) {
      switch (c.kind) {
        case CovariateSpec::Kind::uniform: {
          const auto& [lo, hi] = detail::for_stratum(c.ranges, h);
          const double v = rng.uniform(lo, hi);
          r.features.emplace_back(v);
          if (auto it = spec.outcome.coefficients.find(c.name); it != spec.outcome.coefficients.end())
            eta += it->second * v;
          break;
        }
        case CovariateSpec::Kind::bernoulli: {
          const double v = rng.bernoulli(detail::for_stratum(c.rates, h)) ? 1.0 : 0.0;
          r.features.emplace_back(v);
          if (auto it = spec.outcome.coefficients.find(c.name); it != spec.outcome.coefficients.end())
            eta += it->second * v;
          break;
        }
        case CovariateSpec::Kind::categorical: {
          const std::size_t k = detail::draw_category(detail::for_stratum(c.level_probabilities, h), rng);
          r.features.emplace_back(c.levels[k]);
          if (auto it = spec.outcome.coefficients.find(c.name + "=" + c.levels[k]);
              it != spec.outcome.coefficients.end())
            eta += it->second;
          break;
        }
      }
    }
    r.outcome = rng.bernoulli(inverse_logit(eta)) ? 1 : 0;
    records.push_back(std::move(r));
  }
  return FinitePopulation(spec.feature_specs(), std::move(records));
}

}  // namespace sveval
