#pragma once

// JSON experiment documents: parsing into ExperimentSpec, writing back,
// and materializing the population they describe.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "sveval/errors.hpp"
#include "sveval/harness.hpp"
#include "sveval/ingest.hpp"
#include "sveval/population.hpp"
#include "sveval/rng.hpp"

namespace sveval {

inline constexpr int kExperimentSchemaVersion = 1;

/// A population read from CSV instead of generated.
struct PopulationFile {
  std::string path;  // resolved against the experiment document's directory
  DataSchema schema;
};

struct ExperimentDocument {
  ExperimentSpec spec;
  std::optional<PopulationFile> population_file;
};

namespace detail {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw DataError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw DataError(where + ": unknown key '" + key + "'");
  }
}

inline PopulationSpec population_from_json(const json& j) {
  reject_unknown(j, {"size", "strata", "covariates", "outcome"}, "population");
  PopulationSpec p;
  p.size = j.at("size").get<std::size_t>();
  for (const auto& s : j.at("strata")) {
    p.strata.push_back(s.at("label").get<std::string>());
    p.proportions.push_back(s.at("proportion").get<double>());
  }
  for (const auto& c : j.value("covariates", json::array())) {
    CovariateSpec cov;
    cov.name = c.at("name").get<std::string>();
    const std::string kind = c.at("kind").get<std::string>();
    if (kind == "uniform") {
      cov.kind = CovariateSpec::Kind::uniform;
      for (const auto& r : c.at("ranges")) {
        if (r.size() != 2) throw DataError("covariate " + cov.name + ": ranges are [low, high] pairs");
        cov.ranges.emplace_back(r[0].get<double>(), r[1].get<double>());
      }
    } else if (kind == "bernoulli") {
      cov.kind = CovariateSpec::Kind::bernoulli;
      cov.rates = c.at("rates").get<std::vector<double>>();
    } else if (kind == "categorical") {
      cov.kind = CovariateSpec::Kind::categorical;
      cov.levels = c.at("levels").get<std::vector<std::string>>();
      cov.level_probabilities = c.at("probabilities").get<std::vector<std::vector<double>>>();
    } else {
      throw DataError("covariate " + cov.name + ": unknown kind '" + kind + "'");
    }
    p.covariates.push_back(std::move(cov));
  }
  const json& outcome = j.at("outcome");
  p.outcome.intercept = outcome.value("intercept", 0.0);
  if (outcome.contains("coefficients"))
    p.outcome.coefficients = outcome.at("coefficients").get<std::map<std::string, double>>();
  p.validate();
  return p;
}

inline ojson population_to_json(const PopulationSpec& p) {
  ojson strata = ojson::array();
  for (std::size_t h = 0; h < p.strata.size(); ++h)
    strata.push_back({{"label", p.strata[h]}, {"proportion", p.proportions[h]}});
  ojson covariates = ojson::array();
  for (const CovariateSpec& c : p.covariates) {
    ojson cj{{"name", c.name}};
    switch (c.kind) {
      case CovariateSpec::Kind::uniform: {
        cj["kind"] = "uniform";
        ojson ranges = ojson::array();
        for (const auto& [lo, hi] : c.ranges) ranges.push_back({lo, hi});
        cj["ranges"] = ranges;
        break;
      }
      case CovariateSpec::Kind::bernoulli:
        cj["kind"] = "bernoulli";
        cj["rates"] = c.rates;
        break;
      case CovariateSpec::Kind::categorical:
        cj["kind"] = "categorical";
        cj["levels"] = c.levels;
        cj["probabilities"] = c.level_probabilities;
        break;
    }
    covariates.push_back(cj);
  }
  ojson coefficients = ojson::object();
  for (const auto& [k, v] : p.outcome.coefficients) coefficients[k] = v;
  return {{"size", p.size},
          {"strata", strata},
          {"covariates", covariates},
          {"outcome", {{"intercept", p.outcome.intercept}, {"coefficients", coefficients}}}};
}

inline ClassifierSpec classifier_from_json(const json& j) {
  reject_unknown(j, {"name", "type", "balanced", "params"}, "classifier");
  ClassifierSpec c;
  c.type = parse_classifier_type(j.at("type").get<std::string>());
  c.name = j.value("name", to_string(c.type));
  c.balanced = j.value("balanced", false);
  const json params = j.value("params", json::object());
  switch (c.type) {
    case ClassifierType::logistic:
      reject_unknown(params, {"max_iterations", "tolerance", "max_halvings", "separation_bound"},
                     "logistic params");
      c.logistic.max_iterations = params.value("max_iterations", c.logistic.max_iterations);
      c.logistic.tolerance = params.value("tolerance", c.logistic.tolerance);
      c.logistic.max_halvings = params.value("max_halvings", c.logistic.max_halvings);
      c.logistic.separation_bound = params.value("separation_bound", c.logistic.separation_bound);
      break;
    case ClassifierType::tree:
      reject_unknown(params, {"max_depth", "min_node_size"}, "tree params");
      c.tree.max_depth = params.value("max_depth", c.tree.max_depth);
      c.tree.min_node_size = params.value("min_node_size", c.tree.min_node_size);
      break;
    case ClassifierType::forest:
      reject_unknown(params, {"trees", "mtry", "min_node_size", "max_depth", "bootstrap"}, "forest params");
      c.forest.trees = params.value("trees", c.forest.trees);
      c.forest.mtry = params.value("mtry", c.forest.mtry);
      c.forest.min_node_size = params.value("min_node_size", c.forest.min_node_size);
      c.forest.max_depth = params.value("max_depth", c.forest.max_depth);
      c.forest.bootstrap = params.value("bootstrap", c.forest.bootstrap);
      break;
    case ClassifierType::constant:
      reject_unknown(params, {"score"}, "constant params");
      c.constant_score = params.value("score", c.constant_score);
      break;
  }
  return c;
}

inline ojson classifier_to_json(const ClassifierSpec& c) {
  ojson params;
  switch (c.type) {
    case ClassifierType::logistic:
      params = {{"max_iterations", c.logistic.max_iterations},
                {"tolerance", c.logistic.tolerance},
                {"max_halvings", c.logistic.max_halvings},
                {"separation_bound", c.logistic.separation_bound}};
      break;
    case ClassifierType::tree:
      params = {{"max_depth", c.tree.max_depth}, {"min_node_size", c.tree.min_node_size}};
      break;
    case ClassifierType::forest:
      params = {{"trees", c.forest.trees},
                {"mtry", c.forest.mtry},
                {"min_node_size", c.forest.min_node_size},
                {"max_depth", c.forest.max_depth},
                {"bootstrap", c.forest.bootstrap}};
      break;
    case ClassifierType::constant:
      params = {{"score", c.constant_score}};
      break;
  }
  return {{"name", c.name}, {"type", to_string(c.type)}, {"balanced", c.balanced}, {"params", params}};
}

}  // namespace detail

inline nlohmann::ordered_json grid_to_json(const GridSpec& g) {
  nlohmann::ordered_json j{{"mode", g.mode == GridSpec::Mode::exact ? "exact" : "uniform"}};
  if (g.mode == GridSpec::Mode::uniform) j["points"] = g.points;
  return j;
}

/// Parses an experiment document. Relative population file paths are
/// resolved against `base_dir`. Unknown keys are rejected so that typos do
/// not silently fall back to defaults. Throws DataError.
inline ExperimentDocument experiment_from_json(const nlohmann::json& j,
                                               const std::filesystem::path& base_dir = {}) {
  try {
    detail::reject_unknown(j,
                           {"spec_version", "population", "population_csv", "design", "eval_fraction",
                            "classifiers", "thresholds", "auroc_grid", "replicates", "master_seed",
                            "truth_excludes_sample"},
                           "experiment");
    if (j.at("spec_version").get<int>() != kExperimentSchemaVersion)
      throw DataError("experiment: unsupported spec_version");
    ExperimentDocument doc;
    ExperimentSpec& spec = doc.spec;
    if (j.contains("population") == j.contains("population_csv"))
      throw DataError("experiment: give exactly one of 'population' and 'population_csv'");
    if (j.contains("population")) {
      spec.population = detail::population_from_json(j.at("population"));
    } else {
      const auto& pf = j.at("population_csv");
      detail::reject_unknown(pf, {"path", "schema"}, "population_csv");
      std::filesystem::path path = pf.at("path").get<std::string>();
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      doc.population_file = PopulationFile{path.string(), DataSchema::from_json(pf.at("schema"))};
    }
    const auto& design = j.at("design");
    detail::reject_unknown(design, {"allocations"}, "design");
    spec.design.allocations = design.at("allocations").get<std::map<std::string, std::size_t>>();
    spec.eval_fraction = j.value("eval_fraction", spec.eval_fraction);
    for (const auto& c : j.at("classifiers")) spec.classifiers.push_back(detail::classifier_from_json(c));
    if (j.contains("thresholds")) spec.thresholds = j.at("thresholds").get<std::vector<double>>();
    if (j.contains("auroc_grid")) {
      const auto& g = j.at("auroc_grid");
      detail::reject_unknown(g, {"mode", "points"}, "auroc_grid");
      const std::string mode = g.value("mode", std::string("uniform"));
      if (mode == "exact") {
        spec.grid.mode = GridSpec::Mode::exact;
      } else if (mode == "uniform") {
        spec.grid.points = g.value("points", spec.grid.points);
      } else {
        throw DataError("auroc_grid: unknown mode '" + mode + "'");
      }
    }
    spec.replicates = j.value("replicates", spec.replicates);
    spec.master_seed = j.at("master_seed").get<std::uint64_t>();
    spec.truth_excludes_sample = j.value("truth_excludes_sample", false);
    spec.validate();
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("experiment: ") + e.what());
  }
}

inline ExperimentDocument read_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return experiment_from_json(j, std::filesystem::path(path).parent_path());
}

inline nlohmann::ordered_json experiment_to_json(const ExperimentDocument& doc) {
  const ExperimentSpec& spec = doc.spec;
  nlohmann::ordered_json j;
  j["spec_version"] = kExperimentSchemaVersion;
  if (spec.population) j["population"] = detail::population_to_json(*spec.population);
  if (doc.population_file)
    j["population_csv"] = {{"path", doc.population_file->path}, {"schema", doc.population_file->schema.to_json()}};
  nlohmann::ordered_json alloc = nlohmann::ordered_json::object();
  for (const auto& [label, n] : spec.design.allocations) alloc[label] = n;
  j["design"] = {{"allocations", alloc}};
  j["eval_fraction"] = spec.eval_fraction;
  j["classifiers"] = nlohmann::ordered_json::array();
  for (const ClassifierSpec& c : spec.classifiers) j["classifiers"].push_back(detail::classifier_to_json(c));
  j["thresholds"] = spec.thresholds;
  j["auroc_grid"] = grid_to_json(spec.grid);
  j["replicates"] = spec.replicates;
  j["master_seed"] = spec.master_seed;
  j["truth_excludes_sample"] = spec.truth_excludes_sample;
  return j;
}

/// The generated population (from its own stream of the master seed) or
/// the population file, which must carry a stratum column.
inline FinitePopulation materialize_population(const ExperimentDocument& doc) {
  if (doc.spec.population) {
    Rng rng = Rng::stream(doc.spec.master_seed, 0, Stage::population);
    return generate_population(*doc.spec.population, rng);
  }
  if (!doc.population_file) throw DataError("experiment: no population configured");
  if (!doc.population_file->schema.stratum_column)
    throw DataError("population file schema needs a stratum column");
  return ingest_csv(doc.population_file->path, doc.population_file->schema, true).frame;
}

}  // namespace sveval
