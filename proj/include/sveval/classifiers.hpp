#pragma once

// Classifier configuration, training on a record subset (with optional
// minority upsampling), and scoring of records.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sveval/encoding.hpp"
#include "sveval/errors.hpp"
#include "sveval/logistic.hpp"
#include "sveval/rng.hpp"
#include "sveval/tree.hpp"
#include "sveval/types.hpp"
#include "sveval/upsample.hpp"

namespace sveval {

/// Scores every record with the same value; a degenerate reference model.
struct ConstantModel {
  double score = 1.0;
};

inline double predict_proba(const ConstantModel& model, std::span<const double>) {
  return model.score;
}

enum class ClassifierType { logistic, tree, forest, constant };

inline std::string_view to_string(ClassifierType type) {
  switch (type) {
    case ClassifierType::logistic: return "logistic";
    case ClassifierType::tree: return "tree";
    case ClassifierType::forest: return "forest";
    case ClassifierType::constant: return "constant";
  }
  return "";
}

inline ClassifierType parse_classifier_type(std::string_view name) {
  if (name == "logistic") return ClassifierType::logistic;
  if (name == "tree") return ClassifierType::tree;
  if (name == "forest") return ClassifierType::forest;
  if (name == "constant") return ClassifierType::constant;
  throw DataError("unknown classifier type '" + std::string(name) + "'");
}

struct ClassifierSpec {
  std::string name;
  ClassifierType type = ClassifierType::logistic;
  bool balanced = false;  // upsample the minority class of the training data
  LogisticConfig logistic;
  TreeConfig tree;
  ForestConfig forest;
  double constant_score = 1.0;
};

using ClassifierModel = std::variant<LogisticModel, TreeModel, ForestModel, ConstantModel>;

struct TrainedModel {
  FeatureEncoder encoder;
  ClassifierModel model;
};

/// Trains on the given frame rows. Classifiers are fit unweighted; the
/// upsampling stream is used only when spec.balanced is set, and the
/// forest seed only for forests.
inline TrainedModel train_classifier(const ClassifierSpec& spec, const RecordFrame& frame,
                                     std::span<const std::size_t> rows, Rng& upsample_rng,
                                     std::uint64_t forest_seed, std::size_t threads = 1) {
  if (rows.empty()) throw DataError("no training records");
  TrainedModel trained;
  trained.encoder = FeatureEncoder::fit(frame, rows, spec.type == ClassifierType::logistic);
  Dataset data = trained.encoder.encode(frame, rows);
  if (spec.balanced) {
    const std::vector<std::size_t> balanced = upsample_minority(data.y, upsample_rng);
    data = take_rows(data, balanced);
  }
  switch (spec.type) {
    case ClassifierType::logistic:
      trained.model = fit_logistic(data, spec.logistic);
      break;
    case ClassifierType::tree:
      trained.model = fit_tree(data, spec.tree);
      break;
    case ClassifierType::forest:
      trained.model = fit_forest(data, spec.forest, forest_seed, threads);
      break;
    case ClassifierType::constant:
      if (!(spec.constant_score >= 0.0 && spec.constant_score <= 1.0))
        throw DataError("constant score must lie in [0, 1]");
      trained.model = ConstantModel{spec.constant_score};
      break;
  }
  return trained;
}

inline double predict_encoded(const ClassifierModel& model, std::span<const double> row) {
  return std::visit([&](const auto& m) { return predict_proba(m, row); }, model);
}

/// Scores one record: encode, then predict.
inline double predict_proba(const TrainedModel& trained, const Record& record,
                            bool* unseen_category = nullptr) {
  std::vector<double> buffer(trained.encoder.width());
  const bool seen = trained.encoder.encode(record, buffer);
  if (unseen_category != nullptr) *unseen_category = !seen;
  return predict_encoded(trained.model, buffer);
}

/// Scores the given rows; `unseen` (optional) receives the number of rows
/// that contained a category level unseen in training.
inline std::vector<double> predict_rows(const TrainedModel& trained, const RecordFrame& frame,
                                        std::span<const std::size_t> rows,
                                        std::size_t* unseen = nullptr) {
  std::vector<double> scores(rows.size());
  std::vector<double> buffer(trained.encoder.width());
  std::size_t missing = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!trained.encoder.encode(frame[rows[i]], buffer)) ++missing;
    scores[i] = predict_encoded(trained.model, buffer);
  }
  if (unseen != nullptr) *unseen = missing;
  return scores;
}

}  // namespace sveval
