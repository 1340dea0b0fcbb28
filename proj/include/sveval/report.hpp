#pragma once

// Summary tables as aligned text, JSON and CSV. Text tables show four
// decimals; JSON carries full precision plus a "display" mirror holding
// exactly the numbers printed in the text.

#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sveval/csv.hpp"
#include "sveval/estimation.hpp"
#include "sveval/experiment_io.hpp"
#include "sveval/harness.hpp"
#include "sveval/roc.hpp"

namespace sveval {

inline constexpr int kReportSchemaVersion = 1;

inline std::string format4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

/// The value a reader recovers from the four-decimal text.
inline double displayed(double v) { return *parse_double(format4(v)); }

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(); }

inline ojson opt_display(const std::optional<double>& v) { return v ? ojson(displayed(*v)) : ojson(); }

inline ojson moments_json(const Moments& m) {
  return {{"count", m.count}, {"mean", opt(m.mean)}, {"sd", opt(m.sd)}, {"sem", opt(m.sem)}};
}

inline std::string metric_label(MetricKind kind, std::optional<double> threshold) {
  std::string label = kind == MetricKind::sensitivity   ? "Sensitivity"
                      : kind == MetricKind::specificity ? "Specificity"
                                                        : "AUROC";
  if (threshold) label += " @ " + format_exact(*threshold);
  return label;
}

inline std::string cell(const std::optional<double>& value, const std::optional<double>& spread) {
  if (!value) return "NA";
  std::string s = format4(*value);
  if (spread) s += " (± " + format4(*spread) + ")";
  return s;
}

inline void pad_row(std::ostream& out, const std::vector<std::string>& cols, const std::vector<std::size_t>& widths) {
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << cols[i];
    if (i + 1 < cols.size()) {
      // "±" is two bytes but one column
      std::size_t shown = 0;
      for (unsigned char c : cols[i]) shown += (c & 0xC0) != 0x80;
      out << std::string(widths[i] > shown ? widths[i] - shown + 2 : 2, ' ');
    }
  }
  out << '\n';
}

inline void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::size_t shown = 0;
      for (unsigned char c : r[i]) shown += (c & 0xC0) != 0x80;
      if (widths.size() <= i) widths.push_back(0);
      widths[i] = std::max(widths[i], shown);
    }
  for (const auto& r : rows) pad_row(out, r, widths);
}

}  // namespace detail

/// Simulation summary document. `experiment` is echoed so a report is
/// self-describing.
inline nlohmann::ordered_json summary_to_json(const SummaryTable& table, const ExperimentDocument& experiment,
                                              std::size_t population_size) {
  using detail::ojson;
  ojson doc;
  doc["spec_version"] = kReportSchemaVersion;
  doc["report"] = "simulation_summary";
  doc["metadata"] = {
      {"replicates", table.replicates},
      {"sampling_failures", table.sampling_failures},
      {"population_size", population_size},
      {"sample_size", experiment.spec.design.total()},
      {"master_seed", experiment.spec.master_seed},
      {"decision_rule", "positive when score >= threshold"},
      {"auroc_grid", experiment.spec.grid.describe()},
      {"auroc_rule", "trapezoid over (1 - specificity, sensitivity), anchored at (0,0) and (1,1)"},
      {"truth", experiment.spec.truth_excludes_sample ? "population excluding sampled records"
                                                      : "entire population including sampled records"},
      {"spread", "sd is the Monte Carlo standard deviation (divisor count - 1); sem is sd / sqrt(count)"},
      {"forest_defaults",
       "mtry = floor(sqrt(encoded feature count)) unless set, min node size 1, bootstrap size n, Gini splits; "
       "not guaranteed to match the defaults of other random forest implementations"}};
  doc["experiment"] = experiment_to_json(experiment);
  ojson classifiers = ojson::array();
  ojson display = ojson::array();
  for (const ClassifierSummary& c : table.classifiers) {
    ojson rows = ojson::array();
    ojson shown = ojson::array();
    for (const MetricRow& r : c.rows) {
      ojson row{{"metric", to_string(r.metric)},
                {"threshold", detail::opt(r.threshold)},
                {"population", detail::moments_json(r.population)},
                {"unweighted", detail::moments_json(r.unweighted)},
                {"weighted", detail::moments_json(r.weighted)}};
      if (r.metric != MetricKind::auroc) {
        row["unweighted_linearized_se"] = detail::moments_json(r.unweighted_se);
        row["weighted_linearized_se"] = detail::moments_json(r.weighted_se);
      }
      rows.push_back(row);
      shown.push_back({{"metric", to_string(r.metric)},
                       {"threshold", detail::opt(r.threshold)},
                       {"population", {detail::opt_display(r.population.mean), detail::opt_display(r.population.sd)}},
                       {"unweighted", {detail::opt_display(r.unweighted.mean), detail::opt_display(r.unweighted.sd)}},
                       {"weighted", {detail::opt_display(r.weighted.mean), detail::opt_display(r.weighted.sd)}}});
    }
    classifiers.push_back({{"name", c.name},
                           {"successes", c.successes},
                           {"failures", c.failures},
                           {"failure_messages", c.failure_messages},
                           {"rows", rows}});
    display.push_back({{"name", c.name}, {"rows", shown}});
  }
  doc["classifiers"] = classifiers;
  doc["display"] = display;
  return doc;
}

/// Population / Unweighted / Weighted columns, "mean (± Monte Carlo SD)".
inline std::string format_summary(const SummaryTable& table) {
  std::ostringstream out;
  std::vector<std::vector<std::string>> rows{{"Metric", "Population", "Unweighted", "Weighted"}};
  for (const ClassifierSummary& c : table.classifiers) {
    std::string heading = c.name;
    if (c.failures) heading += " (" + std::to_string(c.failures) + " failed replicates)";
    rows.push_back({heading});
    for (const MetricRow& r : c.rows)
      rows.push_back({"    " + detail::metric_label(r.metric, r.threshold),
                      detail::cell(r.population.mean, r.population.sd),
                      detail::cell(r.unweighted.mean, r.unweighted.sd),
                      detail::cell(r.weighted.mean, r.weighted.sd)});
  }
  detail::print_table(out, rows);
  out << "Means over " << table.replicates << " replicates";
  if (table.sampling_failures) out << " (" << table.sampling_failures << " failed at sampling)";
  out << "; Monte Carlo standard deviations in parentheses.\n";
  return out.str();
}

/// Long-format per-replicate CSV: one line per replicate, classifier,
/// metric and threshold. Absent values are empty fields.
inline void write_replicates_csv(std::ostream& out, std::span<const ReplicateReport> reports) {
  const std::vector<std::string> header{"replicate", "seed",       "sample_size",   "eval_size",
                                        "classifier", "error",     "metric",        "threshold",
                                        "population", "unweighted", "unweighted_se", "weighted",
                                        "weighted_se"};
  write_csv_row(out, header);
  auto num = [](const std::optional<double>& v) { return v ? format_exact(*v) : std::string(); };
  for (const ReplicateReport& r : reports) {
    const std::vector<std::string> lead{std::to_string(r.replicate), std::to_string(r.seed),
                                        std::to_string(r.sample_size), std::to_string(r.eval_size)};
    auto emit = [&](const std::string& classifier, const std::string& error, const std::string& metric,
                    const std::string& threshold, const std::optional<double>& pop, const Estimate& unw,
                    const Estimate& w) {
      std::vector<std::string> row = lead;
      row.insert(row.end(), {classifier, error, metric, threshold, num(pop), num(unw.value),
                             num(unw.standard_error), num(w.value), num(w.standard_error)});
      write_csv_row(out, row);
    };
    if (r.error) {
      emit("", *r.error, "", "", std::nullopt, {}, {});
      continue;
    }
    for (const ClassifierResult& c : r.classifiers) {
      if (c.error) {
        emit(c.classifier, *c.error, "", "", std::nullopt, {}, {});
        continue;
      }
      for (const ThresholdResult& t : c.thresholds) {
        const std::string th = format_exact(t.threshold);
        emit(c.classifier, "", "sensitivity", th, t.population_sensitivity, t.unweighted_sensitivity,
             t.weighted_sensitivity);
        emit(c.classifier, "", "specificity", th, t.population_specificity, t.unweighted_specificity,
             t.weighted_specificity);
      }
      emit(c.classifier, "", "auroc", "", c.population_auroc, {c.unweighted_auroc, std::nullopt},
           {c.weighted_auroc, std::nullopt});
    }
  }
}

/// Unweighted and weighted metrics of one scored evaluation set.
struct EvaluationReport {
  std::size_t records = 0;
  double weight_total = 0.0;
  GridSpec grid;
  struct Row {
    double threshold = 0.5;
    MetricKind metric = MetricKind::sensitivity;
    Estimate unweighted;
    Estimate weighted;
  };
  std::vector<Row> rows;
  Estimate unweighted_auroc;
  Estimate weighted_auroc;
};

/// Undefined metrics (a class absent from the set) are reported as absent
/// rather than thrown.
inline EvaluationReport evaluate_cases(std::span<const ScoredCase> cases, std::span<const double> thresholds,
                                       const GridSpec& grid) {
  EvaluationReport report;
  report.records = cases.size();
  for (const ScoredCase& c : cases) report.weight_total += c.weight;
  report.grid = grid;
  for (double t : thresholds) {
    check_threshold(t);
    for (MetricKind kind : {MetricKind::sensitivity, MetricKind::specificity})
      report.rows.push_back({t, kind, detail::estimate_or_absent(cases, t, kind, Weighting::unweighted),
                             detail::estimate_or_absent(cases, t, kind, Weighting::weighted)});
  }
  report.unweighted_auroc.value = detail::metric_or_absent([&] { return auroc(cases, grid, Weighting::unweighted); });
  report.weighted_auroc.value = detail::metric_or_absent([&] { return auroc(cases, grid, Weighting::weighted); });
  return report;
}

inline nlohmann::ordered_json evaluation_to_json(const EvaluationReport& report) {
  using detail::ojson;
  auto est = [](const Estimate& e) {
    return ojson{{"value", detail::opt(e.value)}, {"standard_error", detail::opt(e.standard_error)}};
  };
  auto shown = [](const Estimate& e) {
    return ojson{detail::opt_display(e.value), detail::opt_display(e.standard_error)};
  };
  ojson rows = ojson::array(), display = ojson::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"metric", to_string(r.metric)},
                    {"threshold", r.threshold},
                    {"unweighted", est(r.unweighted)},
                    {"weighted", est(r.weighted)}});
    display.push_back({{"metric", to_string(r.metric)},
                       {"threshold", r.threshold},
                       {"unweighted", shown(r.unweighted)},
                       {"weighted", shown(r.weighted)}});
  }
  rows.push_back({{"metric", "auroc"},
                  {"threshold", nullptr},
                  {"unweighted", est(report.unweighted_auroc)},
                  {"weighted", est(report.weighted_auroc)}});
  display.push_back({{"metric", "auroc"},
                     {"threshold", nullptr},
                     {"unweighted", shown(report.unweighted_auroc)},
                     {"weighted", shown(report.weighted_auroc)}});
  ojson doc;
  doc["spec_version"] = kReportSchemaVersion;
  doc["report"] = "evaluation";
  doc["metadata"] = {{"records", report.records},
                     {"weight_total", report.weight_total},
                     {"decision_rule", "positive when score >= threshold"},
                     {"auroc_grid", report.grid.describe()},
                     {"auroc_rule", "trapezoid over (1 - specificity, sensitivity), anchored at (0,0) and (1,1)"},
                     {"standard_error", "Taylor linearization of the ratio estimator"}};
  doc["rows"] = rows;
  doc["display"] = display;
  return doc;
}

/// Unweighted / Weighted columns, "estimate (± linearized SE)".
inline std::string format_evaluation(const EvaluationReport& report) {
  std::vector<std::vector<std::string>> rows{{"Metric", "Unweighted", "Weighted"}};
  for (const auto& r : report.rows)
    rows.push_back({detail::metric_label(r.metric, r.threshold),
                    detail::cell(r.unweighted.value, r.unweighted.standard_error),
                    detail::cell(r.weighted.value, r.weighted.standard_error)});
  rows.push_back({"AUROC", detail::cell(report.unweighted_auroc.value, std::nullopt),
                  detail::cell(report.weighted_auroc.value, std::nullopt)});
  std::ostringstream out;
  detail::print_table(out, rows);
  out << report.records << " records; linearized standard errors in parentheses; AUROC on the "
      << report.grid.describe() << " threshold grid.\n";
  return out.str();
}

inline void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "threshold,sensitivity,specificity,fpr\n";
  for (const RocPoint& p : curve.points)
    out << format_exact(p.threshold) << ',' << format_exact(p.sensitivity) << ','
        << format_exact(p.specificity) << ',' << format_exact(p.fpr()) << '\n';
}

inline nlohmann::ordered_json weight_diagnostics_to_json(const WeightDiagnostics& d) {
  return {{"spec_version", kReportSchemaVersion},
          {"report", "weight_diagnostics"},
          {"count", d.count},
          {"mean", d.mean},
          {"sd", d.sd},
          {"cv", d.cv},
          {"min", d.min},
          {"max", d.max},
          {"deciles", d.deciles},
          {"display",
           {{"mean", displayed(d.mean)},
            {"sd", displayed(d.sd)},
            {"cv", displayed(d.cv)},
            {"min", displayed(d.min)},
            {"max", displayed(d.max)},
            {"deciles", [&] {
               std::vector<double> v;
               for (double q : d.deciles) v.push_back(displayed(q));
               return v;
             }()}}}};
}

inline std::string format_weight_diagnostics(const WeightDiagnostics& d) {
  std::vector<std::vector<std::string>> rows{{"count", std::to_string(d.count)},
                                             {"mean", format4(d.mean)},
                                             {"sd", format4(d.sd)},
                                             {"cv", format4(d.cv)},
                                             {"min", format4(d.min)},
                                             {"max", format4(d.max)}};
  for (std::size_t k = 0; k < d.deciles.size(); ++k)
    rows.push_back({"p" + std::to_string(10 * (k + 1)), format4(d.deciles[k])});
  std::ostringstream out;
  detail::print_table(out, rows);
  return out.str();
}

}  // namespace sveval
