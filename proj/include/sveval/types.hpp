#pragma once

// Domain types shared across the library: records and populations,
// survey samples, evaluation sets, confusion tallies and metric results.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "sveval/errors.hpp"

namespace sveval {

enum class FeatureKind { numeric, categorical };

inline std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::numeric ? "numeric" : "categorical";
}

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

/// A numeric value or a category label.
using FeatureValue = std::variant<double, std::string>;

struct Record {
  std::string id;
  std::vector<FeatureValue> features;
  int outcome = 0;
  std::string stratum;
};

/// An immutable table of complete records with unique identifiers.
///
/// Used both for a finite population (every individual, with known
/// outcomes) and for the record frame behind a loaded survey file.
class RecordFrame {
 public:
  RecordFrame() = default;

  /// Throws DataError when a record has a non-binary outcome, a feature
  /// vector of the wrong length or kind, a non-finite numeric value, or a
  /// duplicated id.
  RecordFrame(std::vector<FeatureSpec> features, std::vector<Record> records)
      : features_(std::move(features)), records_(std::move(records)) {
    index_.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const Record& r = records_[i];
      if (r.outcome != 0 && r.outcome != 1)
        throw DataError("record " + r.id + ": outcome must be 0 or 1");
      if (r.features.size() != features_.size())
        throw DataError("record " + r.id + ": expected " + std::to_string(features_.size()) +
                        " features, got " + std::to_string(r.features.size()));
      for (std::size_t f = 0; f < features_.size(); ++f) {
        const bool numeric = std::holds_alternative<double>(r.features[f]);
        if (numeric != (features_[f].kind == FeatureKind::numeric))
          throw DataError("record " + r.id + ": feature " + features_[f].name +
                          " has the wrong kind");
        if (numeric && !std::isfinite(std::get<double>(r.features[f])))
          throw DataError("record " + r.id + ": feature " + features_[f].name +
                          " is not finite");
      }
      if (!index_.emplace(r.id, i).second) throw DataError("duplicate id " + r.id);
      strata_[r.stratum].push_back(i);
    }
  }

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const std::vector<Record>& records() const noexcept { return records_; }
  const Record& operator[](std::size_t row) const { return records_[row]; }
  const std::vector<FeatureSpec>& features() const noexcept { return features_; }
  std::size_t feature_count() const noexcept { return features_.size(); }

  std::optional<std::size_t> find(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Row indices per stratum label, each list ascending.
  const std::map<std::string, std::vector<std::size_t>>& strata() const noexcept {
    return strata_;
  }

 private:
  std::vector<FeatureSpec> features_;
  std::vector<Record> records_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<std::string, std::vector<std::size_t>> strata_;
};

/// The universe P of N individuals with known outcomes.
using FinitePopulation = RecordFrame;

struct SampleMember {
  std::string id;
  std::size_t row = 0;  // position in the backing RecordFrame
  double weight = 1.0;
  double inclusion_probability = 1.0;
};

/// Sampled records with design weights. Validity is checked by
/// validate_sample rather than enforced on construction, so that loaded
/// data can be diagnosed instead of rejected wholesale.
struct SurveySample {
  std::vector<SampleMember> members;

  std::size_t size() const noexcept { return members.size(); }
};

struct ValidationReport {
  std::vector<std::string> problems;

  bool ok() const noexcept { return problems.empty(); }
};

/// Reports every violated sample invariant. Never throws on bad data.
inline ValidationReport validate_sample(const SurveySample& sample,
                                        const FinitePopulation* population = nullptr) {
  ValidationReport report;
  std::unordered_set<std::string> seen;
  seen.reserve(sample.members.size());
  for (const SampleMember& m : sample.members) {
    if (!(m.weight > 0.0) || !std::isfinite(m.weight))
      report.problems.push_back("non-positive weight at id " + m.id);
    if (!(m.inclusion_probability > 0.0 && m.inclusion_probability <= 1.0))
      report.problems.push_back("inclusion probability outside (0, 1] at id " + m.id);
    if (!seen.insert(m.id).second) report.problems.push_back("duplicate id " + m.id);
    if (population != nullptr && !population->find(m.id))
      report.problems.push_back("id " + m.id + " not in population");
  }
  return report;
}

/// One evaluated record: true outcome, model score, and weight. The
/// weight is the compound weight for survey-weighted evaluation and 1 for
/// direct population counts.
struct ScoredCase {
  int outcome = 0;
  double score = 0.0;
  double weight = 1.0;
};

/// The test split D_e with compound weights and model scores attached.
class EvaluationSet {
 public:
  EvaluationSet() = default;

  /// Throws DataError if sizes differ, an outcome is not binary, a score
  /// lies outside [0, 1], or a weight is not positive and finite.
  EvaluationSet(std::vector<std::string> ids, std::vector<ScoredCase> cases)
      : ids_(std::move(ids)), cases_(std::move(cases)) {
    if (ids_.size() != cases_.size()) throw DataError("evaluation ids and cases differ in length");
    for (std::size_t i = 0; i < cases_.size(); ++i) {
      const ScoredCase& c = cases_[i];
      if (c.outcome != 0 && c.outcome != 1)
        throw DataError("evaluation record " + ids_[i] + ": outcome must be 0 or 1");
      if (!(c.score >= 0.0 && c.score <= 1.0))
        throw DataError("evaluation record " + ids_[i] + ": score outside [0, 1]");
      if (!(c.weight > 0.0) || !std::isfinite(c.weight))
        throw DataError("evaluation record " + ids_[i] + ": non-positive weight");
    }
  }

  std::size_t size() const noexcept { return cases_.size(); }
  bool empty() const noexcept { return cases_.empty(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<ScoredCase>& cases() const noexcept { return cases_; }

 private:
  std::vector<std::string> ids_;
  std::vector<ScoredCase> cases_;
};

/// Weighted totals and raw counts of the four confusion cells.
struct ConfusionTally {
  double tp = 0.0, tn = 0.0, fp = 0.0, fn = 0.0;
  std::uint64_t tp_count = 0, tn_count = 0, fp_count = 0, fn_count = 0;

  double weighted_total() const noexcept { return tp + tn + fp + fn; }
  std::uint64_t count() const noexcept { return tp_count + tn_count + fp_count + fn_count; }
};

enum class MetricKind { sensitivity, specificity, auroc };
enum class Weighting { weighted, unweighted, population };

inline std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::sensitivity: return "sensitivity";
    case MetricKind::specificity: return "specificity";
    case MetricKind::auroc: return "auroc";
  }
  return "";
}

inline std::string_view to_string(Weighting w) {
  switch (w) {
    case Weighting::weighted: return "weighted";
    case Weighting::unweighted: return "unweighted";
    case Weighting::population: return "population";
  }
  return "";
}

struct MetricResult {
  MetricKind kind = MetricKind::sensitivity;
  Weighting weighting = Weighting::weighted;
  double value = 0.0;
  std::optional<double> standard_error;
};

}  // namespace sveval
