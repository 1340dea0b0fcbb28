#pragma once

// Monte Carlo replication harness: repeated stratified sampling, train/test
// splitting, classifier fitting, population-truth scoring, and weighted /
// unweighted evaluation, aggregated into means and Monte Carlo SDs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "sveval/classifiers.hpp"
#include "sveval/errors.hpp"
#include "sveval/estimation.hpp"
#include "sveval/parallel.hpp"
#include "sveval/population.hpp"
#include "sveval/rng.hpp"
#include "sveval/roc.hpp"
#include "sveval/sampling.hpp"
#include "sveval/types.hpp"

namespace sveval {

struct ExperimentSpec {
  std::optional<PopulationSpec> population;  // absent when the population comes from a file
  StratifiedDesign design;
  double eval_fraction = 0.2;
  std::vector<ClassifierSpec> classifiers;
  std::vector<double> thresholds{0.5};
  GridSpec grid;
  std::size_t replicates = 200;
  std::uint64_t master_seed = 0;
  bool truth_excludes_sample = false;  // score only records outside D for the truth

  void validate() const {
    if (replicates < 1) throw DataError("experiment: replicates must be at least 1");
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0))
      throw DataError("experiment: eval_fraction must lie in (0, 1)");
    if (classifiers.empty()) throw DataError("experiment: no classifiers configured");
    if (thresholds.empty()) throw DataError("experiment: no thresholds configured");
    for (double t : thresholds)
      if (!(t >= 0.0 && t <= 1.0)) throw DataError("experiment: threshold outside [0, 1]");
    if (grid.mode == GridSpec::Mode::uniform && grid.points < 2)
      throw DataError("experiment: uniform AUROC grid needs at least two points");
    for (std::size_t i = 0; i < classifiers.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (classifiers[i].name == classifiers[j].name)
          throw DataError("experiment: duplicate classifier name '" + classifiers[i].name + "'");
    if (population) population->validate();
  }

  /// Synthetic five-stratum population (N = 116,761) sampled at n = 10,000
  /// with the 19-25 and 54-65 strata oversampled (sampling fractions about
  /// 0.35 and 0.16 against 0.02 to 0.04 elsewhere); logistic regression, an
  /// unbalanced forest and an upsampled forest; threshold 0.5; 101-point
  /// AUROC grid; 200 replicates.
  static ExperimentSpec synthetic_default() {
    ExperimentSpec spec;
    spec.population = PopulationSpec::synthetic_default();
    spec.design.allocations = {
        {"19-25", 4500}, {"25-34", 700}, {"34-54", 800}, {"54-65", 3300}, {"65-100", 700}};
    ClassifierSpec logistic{"logistic", ClassifierType::logistic};
    ClassifierSpec forest{"random_forest", ClassifierType::forest};
    ClassifierSpec balanced{"balanced_random_forest", ClassifierType::forest};
    balanced.balanced = true;
    spec.classifiers = {logistic, forest, balanced};
    spec.master_seed = 20240917;
    return spec;
  }
};

struct Estimate {
  std::optional<double> value;
  std::optional<double> standard_error;
};

struct ThresholdResult {
  double threshold = 0.5;
  std::optional<double> population_sensitivity;
  std::optional<double> population_specificity;
  Estimate unweighted_sensitivity;
  Estimate unweighted_specificity;
  Estimate weighted_sensitivity;
  Estimate weighted_specificity;
};

struct ClassifierResult {
  std::string classifier;
  std::optional<std::string> error;  // set when training or scoring failed
  std::vector<ThresholdResult> thresholds;
  std::optional<double> population_auroc;
  std::optional<double> unweighted_auroc;
  std::optional<double> weighted_auroc;
  std::size_t unseen_categories = 0;

  bool ok() const noexcept { return !error.has_value(); }
};

struct ReplicateReport {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::size_t sample_size = 0;
  std::size_t eval_size = 0;
  std::optional<std::string> error;  // set when sampling itself failed
  std::vector<ClassifierResult> classifiers;
};

namespace detail {

template <class Fn>
std::optional<double> metric_or_absent(Fn&& fn) {
  try {
    return fn();
  } catch (const UndefinedMetricError&) {
    return std::nullopt;
  }
}

inline Estimate estimate_or_absent(std::span<const ScoredCase> cases, double t, MetricKind kind,
                                   Weighting weighting) {
  try {
    const MetricResult r = estimate_metric(cases, t, kind, weighting);
    return {r.value, r.standard_error};
  } catch (const UndefinedMetricError&) {
    return {};
  }
}

}  // namespace detail

/// Evaluates one trained model: truth over the population rows, estimates
/// over the evaluation members.
inline void evaluate_replicate_model(const ExperimentSpec& spec, const FinitePopulation& population,
                                     std::span<const std::size_t> truth_rows,
                                     std::span<const EvaluationMember> evaluation,
                                     const TrainedModel& model, ClassifierResult& out) {
  std::vector<ScoredCase> truth(truth_rows.size());
  const std::vector<double> truth_scores = predict_rows(model, population, truth_rows, &out.unseen_categories);
  for (std::size_t i = 0; i < truth_rows.size(); ++i)
    truth[i] = {population[truth_rows[i]].outcome, truth_scores[i], 1.0};

  std::vector<std::size_t> eval_rows;
  eval_rows.reserve(evaluation.size());
  for (const EvaluationMember& m : evaluation) eval_rows.push_back(m.row);
  const std::vector<double> eval_scores = predict_rows(model, population, eval_rows);
  std::vector<ScoredCase> eval(evaluation.size());
  for (std::size_t i = 0; i < evaluation.size(); ++i)
    eval[i] = {population[eval_rows[i]].outcome, eval_scores[i], evaluation[i].compound_weight};

  for (double t : spec.thresholds) {
    ThresholdResult r;
    r.threshold = t;
    const ConfusionTally tally = tally_confusion(truth, t);
    r.population_sensitivity =
        detail::metric_or_absent([&] { return sensitivity(tally, Weighting::unweighted).value; });
    r.population_specificity =
        detail::metric_or_absent([&] { return specificity(tally, Weighting::unweighted).value; });
    r.unweighted_sensitivity = detail::estimate_or_absent(eval, t, MetricKind::sensitivity, Weighting::unweighted);
    r.unweighted_specificity = detail::estimate_or_absent(eval, t, MetricKind::specificity, Weighting::unweighted);
    r.weighted_sensitivity = detail::estimate_or_absent(eval, t, MetricKind::sensitivity, Weighting::weighted);
    r.weighted_specificity = detail::estimate_or_absent(eval, t, MetricKind::specificity, Weighting::weighted);
    out.thresholds.push_back(r);
  }
  out.population_auroc =
      detail::metric_or_absent([&] { return auroc(truth, spec.grid, Weighting::unweighted); });
  out.unweighted_auroc =
      detail::metric_or_absent([&] { return auroc(eval, spec.grid, Weighting::unweighted); });
  out.weighted_auroc =
      detail::metric_or_absent([&] { return auroc(eval, spec.grid, Weighting::weighted); });
}

/// One sample -> split -> train -> evaluate cycle. Every random draw comes
/// from streams keyed by (master seed, replicate index, stage), so a
/// replicate can be reproduced on its own. Classifier failures are
/// recorded in the report rather than thrown.
inline ReplicateReport run_replicate(const ExperimentSpec& spec, const FinitePopulation& population,
                                     std::size_t replicate) {
  ReplicateReport report;
  report.replicate = replicate;
  report.seed = derive_seed({spec.master_seed, replicate});

  TrainTestSplit split;
  try {
    Rng sampling = Rng::stream(spec.master_seed, replicate, Stage::sampling);
    const SurveySample sample = stratified_sample(population, spec.design, sampling);
    Rng splitting = Rng::stream(spec.master_seed, replicate, Stage::splitting);
    split = split_train_test(sample, spec.eval_fraction, splitting);
    report.sample_size = split.sample_size;
    report.eval_size = split.eval_size;
  } catch (const Error& e) {
    report.error = e.what();
    return report;
  }

  std::vector<std::size_t> train_rows;
  train_rows.reserve(split.training.size());
  for (const SampleMember& m : split.training.members) train_rows.push_back(m.row);

  std::vector<std::size_t> truth_rows;
  truth_rows.reserve(population.size());
  if (spec.truth_excludes_sample) {
    std::vector<char> sampled(population.size(), 0);
    for (const SampleMember& m : split.training.members) sampled[m.row] = 1;
    for (const EvaluationMember& m : split.evaluation) sampled[m.row] = 1;
    for (std::size_t i = 0; i < population.size(); ++i)
      if (!sampled[i]) truth_rows.push_back(i);
  } else {
    truth_rows.resize(population.size());
    std::iota(truth_rows.begin(), truth_rows.end(), std::size_t{0});
  }

  for (std::size_t k = 0; k < spec.classifiers.size(); ++k) {
    const ClassifierSpec& cs = spec.classifiers[k];
    ClassifierResult result;
    result.classifier = cs.name;
    try {
      Rng upsampling = Rng::stream(spec.master_seed, replicate, Stage::upsampling, k);
      const std::uint64_t forest_seed =
          derive_seed({spec.master_seed, replicate, static_cast<std::uint64_t>(Stage::forest), k});
      const TrainedModel model = train_classifier(cs, population, train_rows, upsampling, forest_seed);
      evaluate_replicate_model(spec, population, truth_rows, split.evaluation, model, result);
    } catch (const Error& e) {
      result = ClassifierResult{};
      result.classifier = cs.name;
      result.error = e.what();
    }
    report.classifiers.push_back(std::move(result));
  }
  return report;
}

/// Runs every replicate, on up to `threads` workers. The result is in
/// replicate order and independent of the thread count.
inline std::vector<ReplicateReport> run_experiment(const ExperimentSpec& spec,
                                                   const FinitePopulation& population,
                                                   std::size_t threads = 1) {
  spec.validate();
  spec.design.validate(population);
  std::vector<ReplicateReport> reports(spec.replicates);
  parallel_for(spec.replicates, threads,
               [&](std::size_t r) { reports[r] = run_replicate(spec, population, r); });
  return reports;
}

/// Mean, Monte Carlo SD (divisor count - 1) and SD / sqrt(count).
struct Moments {
  std::size_t count = 0;
  std::optional<double> mean;
  std::optional<double> sd;
  std::optional<double> sem;
};

inline Moments moments(std::span<const double> values) {
  Moments m;
  m.count = values.size();
  if (values.empty()) return m;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  m.mean = mean;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    m.sd = sd;
    m.sem = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return m;
}

struct MetricRow {
  MetricKind metric = MetricKind::sensitivity;
  std::optional<double> threshold;  // absent for AUROC
  Moments population;
  Moments unweighted;
  Moments weighted;
  Moments unweighted_se;  // linearized SEs across replicates (SN/SP only)
  Moments weighted_se;
};

struct ClassifierSummary {
  std::string name;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;  // distinct, in first-seen order
  std::vector<MetricRow> rows;
};

struct SummaryTable {
  std::size_t replicates = 0;
  std::size_t sampling_failures = 0;
  std::vector<ClassifierSummary> classifiers;
};

/// Per classifier and metric: moments over successful replicates, in
/// replicate order. Throws DataError when a classifier has fewer than two
/// successful replicates.
inline SummaryTable aggregate(std::span<const ReplicateReport> reports) {
  SummaryTable table;
  table.replicates = reports.size();
  std::vector<std::string> names;
  std::vector<double> thresholds;
  for (const ReplicateReport& r : reports) {
    if (r.error) {
      ++table.sampling_failures;
      continue;
    }
    if (names.empty())
      for (const ClassifierResult& c : r.classifiers) names.push_back(c.classifier);
    for (const ClassifierResult& c : r.classifiers) {
      if (!thresholds.empty() || !c.ok()) continue;
      for (const ThresholdResult& t : c.thresholds) thresholds.push_back(t.threshold);
    }
  }

  for (std::size_t k = 0; k < names.size(); ++k) {
    ClassifierSummary summary;
    summary.name = names[k];
    std::vector<const ClassifierResult*> ok;
    for (const ReplicateReport& r : reports) {
      if (r.error || k >= r.classifiers.size()) continue;
      const ClassifierResult& c = r.classifiers[k];
      if (c.ok()) {
        ok.push_back(&c);
      } else {
        ++summary.failures;
        if (std::find(summary.failure_messages.begin(), summary.failure_messages.end(), *c.error) ==
            summary.failure_messages.end())
          summary.failure_messages.push_back(*c.error);
      }
    }
    summary.successes = ok.size();
    if (ok.size() < 2)
      throw DataError("classifier '" + summary.name + "': fewer than two successful replicates (" +
                      std::to_string(ok.size()) + ")");

    auto collect = [&](auto&& get) {
      std::vector<double> values;
      for (const ClassifierResult* c : ok)
        if (const std::optional<double> v = get(*c)) values.push_back(*v);
      return moments(values);
    };
    for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
      auto at = [ti](const ClassifierResult& c) -> const ThresholdResult& { return c.thresholds[ti]; };
      MetricRow sn{MetricKind::sensitivity, thresholds[ti]};
      sn.population = collect([&](const ClassifierResult& c) { return at(c).population_sensitivity; });
      sn.unweighted = collect([&](const ClassifierResult& c) { return at(c).unweighted_sensitivity.value; });
      sn.weighted = collect([&](const ClassifierResult& c) { return at(c).weighted_sensitivity.value; });
      sn.unweighted_se = collect([&](const ClassifierResult& c) { return at(c).unweighted_sensitivity.standard_error; });
      sn.weighted_se = collect([&](const ClassifierResult& c) { return at(c).weighted_sensitivity.standard_error; });
      summary.rows.push_back(sn);
      MetricRow sp{MetricKind::specificity, thresholds[ti]};
      sp.population = collect([&](const ClassifierResult& c) { return at(c).population_specificity; });
      sp.unweighted = collect([&](const ClassifierResult& c) { return at(c).unweighted_specificity.value; });
      sp.weighted = collect([&](const ClassifierResult& c) { return at(c).weighted_specificity.value; });
      sp.unweighted_se = collect([&](const ClassifierResult& c) { return at(c).unweighted_specificity.standard_error; });
      sp.weighted_se = collect([&](const ClassifierResult& c) { return at(c).weighted_specificity.standard_error; });
      summary.rows.push_back(sp);
    }
    MetricRow roc{MetricKind::auroc, std::nullopt};
    roc.population = collect([](const ClassifierResult& c) { return c.population_auroc; });
    roc.unweighted = collect([](const ClassifierResult& c) { return c.unweighted_auroc; });
    roc.weighted = collect([](const ClassifierResult& c) { return c.weighted_auroc; });
    summary.rows.push_back(roc);
    table.classifiers.push_back(std::move(summary));
  }
  if (table.classifiers.empty())
    throw DataError("aggregate: fewer than two successful replicates");
  return table;
}

}  // namespace sveval
