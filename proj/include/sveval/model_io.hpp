#pragma once

// Self-describing JSON documents for trained models: schema version,
// feature encoding, and the fitted parameters or trees.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "sveval/classifiers.hpp"
#include "sveval/errors.hpp"

namespace sveval {

inline constexpr int kModelSchemaVersion = 1;

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson tree_to_json(const TreeModel& tree) {
  ojson feature = ojson::array(), split = ojson::array(), left = ojson::array(),
        right = ojson::array(), value = ojson::array(), count = ojson::array();
  for (const TreeNode& n : tree.nodes) {
    feature.push_back(n.feature);
    split.push_back(n.split);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.positive_fraction);
    count.push_back(n.count);
  }
  return ojson{{"feature_count", tree.feature_count},
               {"feature", feature},
               {"split", split},
               {"left", left},
               {"right", right},
               {"positive_fraction", value},
               {"count", count}};
}

inline TreeModel tree_from_json(const ojson& j) {
  TreeModel tree;
  tree.feature_count = j.at("feature_count").get<std::size_t>();
  const auto& feature = j.at("feature");
  const std::size_t n = feature.size();
  const auto& split = j.at("split");
  const auto& left = j.at("left");
  const auto& right = j.at("right");
  const auto& value = j.at("positive_fraction");
  const auto& count = j.at("count");
  if (split.size() != n || left.size() != n || right.size() != n || value.size() != n ||
      count.size() != n || n == 0)
    throw DataError("model document: malformed tree");
  tree.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    TreeNode& node = tree.nodes[i];
    node.feature = feature[i].get<int>();
    node.split = split[i].get<double>();
    node.left = left[i].get<std::int32_t>();
    node.right = right[i].get<std::int32_t>();
    node.positive_fraction = value[i].get<double>();
    node.count = count[i].get<std::size_t>();
    if (!node.leaf()) {
      const auto in_range = [n, i](std::int32_t c) {
        return c > static_cast<std::int64_t>(i) && static_cast<std::size_t>(c) < n;
      };
      if (node.feature >= static_cast<int>(tree.feature_count) || !in_range(node.left) ||
          !in_range(node.right))
        throw DataError("model document: tree node " + std::to_string(i) + " is inconsistent");
    }
  }
  return tree;
}

}  // namespace detail

inline nlohmann::ordered_json model_to_json(const TrainedModel& trained) {
  using detail::ojson;
  ojson features = ojson::array();
  const auto& enc = trained.encoder;
  for (std::size_t f = 0; f < enc.features().size(); ++f)
    features.push_back({{"name", enc.features()[f].name},
                        {"kind", to_string(enc.features()[f].kind)},
                        {"levels", enc.levels()[f]}});
  ojson doc;
  doc["spec_version"] = kModelSchemaVersion;
  doc["encoding"] = {{"drop_first", enc.drop_first()},
                     {"features", features},
                     {"columns", enc.column_names()}};
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LogisticModel>) {
          doc["model_type"] = "logistic";
          doc["model"] = {{"intercept", m.intercept},
                          {"coefficients", m.coefficients},
                          {"standard_errors", m.standard_errors},
                          {"convergence",
                           {{"iterations", m.convergence.iterations},
                            {"deviance_change", m.convergence.deviance_change},
                            {"deviance_trace", m.convergence.deviance_trace}}}};
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          doc["model_type"] = "tree";
          doc["model"] = detail::tree_to_json(m);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          doc["model_type"] = "forest";
          ojson trees = ojson::array();
          for (const TreeModel& t : m.trees) trees.push_back(detail::tree_to_json(t));
          doc["model"] = {{"feature_count", m.feature_count},
                          {"tree_seeds", m.tree_seeds},
                          {"trees", trees}};
        } else {
          doc["model_type"] = "constant";
          doc["model"] = {{"score", m.score}};
        }
      },
      trained.model);
  return doc;
}

/// Throws DataError for an unsupported schema version or malformed content.
inline TrainedModel model_from_json(const nlohmann::ordered_json& doc) {
  try {
    if (doc.at("spec_version").get<int>() != kModelSchemaVersion)
      throw DataError("model document: unsupported spec_version");
    const auto& enc = doc.at("encoding");
    std::vector<FeatureSpec> features;
    std::vector<std::vector<std::string>> levels;
    for (const auto& f : enc.at("features")) {
      const std::string kind = f.at("kind").get<std::string>();
      if (kind != "numeric" && kind != "categorical")
        throw DataError("model document: unknown feature kind '" + kind + "'");
      features.push_back({f.at("name").get<std::string>(),
                          kind == "numeric" ? FeatureKind::numeric : FeatureKind::categorical});
      levels.push_back(f.at("levels").get<std::vector<std::string>>());
    }
    TrainedModel trained;
    trained.encoder = FeatureEncoder(std::move(features), std::move(levels),
                                     enc.at("drop_first").get<bool>());
    const std::string type = doc.at("model_type").get<std::string>();
    const auto& m = doc.at("model");
    if (type == "logistic") {
      LogisticModel lm;
      lm.intercept = m.at("intercept").get<double>();
      lm.coefficients = m.at("coefficients").get<std::vector<double>>();
      lm.standard_errors = m.at("standard_errors").get<std::vector<double>>();
      const auto& c = m.at("convergence");
      lm.convergence.iterations = c.at("iterations").get<int>();
      lm.convergence.deviance_change = c.at("deviance_change").get<double>();
      lm.convergence.deviance_trace = c.at("deviance_trace").get<std::vector<double>>();
      if (lm.coefficients.size() != trained.encoder.width())
        throw DataError("model document: coefficient count does not match the encoding");
      trained.model = std::move(lm);
    } else if (type == "tree") {
      trained.model = detail::tree_from_json(m);
    } else if (type == "forest") {
      ForestModel fm;
      fm.feature_count = m.at("feature_count").get<std::size_t>();
      fm.tree_seeds = m.at("tree_seeds").get<std::vector<std::uint64_t>>();
      for (const auto& t : m.at("trees")) fm.trees.push_back(detail::tree_from_json(t));
      if (fm.trees.empty()) throw DataError("model document: forest has no trees");
      trained.model = std::move(fm);
    } else if (type == "constant") {
      trained.model = ConstantModel{m.at("score").get<double>()};
    } else {
      throw DataError("model document: unknown model_type '" + type + "'");
    }
    return trained;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model document: ") + e.what());
  }
}

}  // namespace sveval
