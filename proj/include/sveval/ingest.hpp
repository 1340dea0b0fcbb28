#pragma once

// Loading survey records from CSV under a declared column schema, with a
// drop-and-count policy for incomplete rows.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "sveval/csv.hpp"
#include "sveval/errors.hpp"
#include "sveval/types.hpp"

namespace sveval {

/// Which CSV columns carry the id, design weight, outcome, features and
/// (optionally) stratum.
struct DataSchema {
  std::string id_column = "id";
  std::optional<std::string> weight_column;
  std::string outcome_column = "y";
  std::vector<FeatureSpec> features;
  std::optional<std::string> stratum_column;

  void validate() const {
    std::set<std::string> names;
    auto add = [&](const std::string& name) {
      if (name.empty()) throw DataError("schema: empty column name");
      if (!names.insert(name).second) throw DataError("schema: column '" + name + "' used twice");
    };
    add(id_column);
    add(outcome_column);
    if (weight_column) add(*weight_column);
    if (stratum_column) add(*stratum_column);
    for (const FeatureSpec& f : features) add(f.name);
  }

  /// {"id": ..., "weight": ..., "outcome": ..., "stratum": ...,
  ///  "features": [{"name": ..., "kind": "numeric" | "categorical"}]}
  static DataSchema from_json(const nlohmann::json& j) {
    try {
      DataSchema s;
      s.id_column = j.value("id", std::string("id"));
      s.outcome_column = j.value("outcome", std::string("y"));
      if (j.contains("weight") && !j.at("weight").is_null()) s.weight_column = j.at("weight").get<std::string>();
      if (j.contains("stratum") && !j.at("stratum").is_null()) s.stratum_column = j.at("stratum").get<std::string>();
      if (j.contains("features")) {
        for (const auto& f : j.at("features")) {
          const std::string kind = f.value("kind", std::string("numeric"));
          if (kind != "numeric" && kind != "categorical")
            throw DataError("schema: unknown feature kind '" + kind + "'");
          s.features.push_back({f.at("name").get<std::string>(),
                                kind == "numeric" ? FeatureKind::numeric : FeatureKind::categorical});
        }
      }
      s.validate();
      return s;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("schema: ") + e.what());
    }
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["id"] = id_column;
    j["weight"] = weight_column ? nlohmann::ordered_json(*weight_column) : nlohmann::ordered_json();
    j["outcome"] = outcome_column;
    j["stratum"] = stratum_column ? nlohmann::ordered_json(*stratum_column) : nlohmann::ordered_json();
    j["features"] = nlohmann::ordered_json::array();
    for (const FeatureSpec& f : features)
      j["features"].push_back({{"name", f.name}, {"kind", to_string(f.kind)}});
    return j;
  }
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::size_t rows_dropped = 0;
  std::map<std::string, std::size_t> reasons;  // first failing check per dropped row
};

struct LoadedData {
  CsvTable table;                        // the file as read
  std::vector<std::size_t> source_rows;  // table row of each kept record
  RecordFrame frame;
  SurveySample sample;  // one member per kept record, in file order
  LoadReport report;
};

/// Converts table rows into records. Rows with a missing or unparseable
/// required field, a non-binary outcome, a non-positive weight or a
/// repeated id are dropped and counted by reason. When `population` is
/// set the weight column is optional and every record gets weight 1.
/// Without `require_outcome` the outcome column is ignored (outcome 0),
/// for scoring files that carry no labels.
///
/// Weights are used as given; pi is recorded as 1 / w, capped at 1 for
/// adjusted weights below 1. Throws DataError for absent schema columns or
/// when no usable row remains.
inline LoadedData ingest_table(CsvTable table, const DataSchema& schema, bool population = false,
                               bool require_outcome = true) {
  schema.validate();
  if (!population && !schema.weight_column)
    throw DataError("schema has no weight column (declare the file a population to load it unweighted)");
  auto require = [&](const std::string& name) {
    const auto c = table.column(name);
    if (!c) throw DataError("column '" + name + "' not found in header");
    return *c;
  };
  const std::size_t id_col = require(schema.id_column);
  std::optional<std::size_t> y_col, w_col, h_col;
  if (require_outcome) y_col = require(schema.outcome_column);
  if (schema.weight_column) w_col = require(*schema.weight_column);
  if (schema.stratum_column) h_col = require(*schema.stratum_column);
  std::vector<std::size_t> f_cols;
  for (const FeatureSpec& f : schema.features) f_cols.push_back(require(f.name));

  LoadedData out;
  LoadReport& report = out.report;
  std::vector<Record> records;
  std::vector<double> weights;
  std::unordered_set<std::string> ids;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    ++report.rows_read;
    auto drop = [&](const std::string& reason) {
      ++report.rows_dropped;
      ++report.reasons[reason];
    };
    if (row.size() != table.header.size()) {
      drop("malformed row");
      continue;
    }
    Record rec;
    rec.id = row[id_col];
    if (rec.id.empty()) {
      drop("missing id");
      continue;
    }
    if (y_col) {
      const std::string& y = row[*y_col];
      if (y.empty()) {
        drop("missing outcome");
        continue;
      }
      const auto yv = parse_double(y);
      if (!yv || (*yv != 0.0 && *yv != 1.0)) {
        drop("invalid outcome");
        continue;
      }
      rec.outcome = static_cast<int>(*yv);
    }
    double weight = 1.0;
    if (w_col) {
      const std::string& w = row[*w_col];
      if (w.empty()) {
        drop("missing weight");
        continue;
      }
      const auto wv = parse_double(w);
      if (!wv) {
        drop("unparseable weight");
        continue;
      }
      if (!(*wv > 0.0)) {
        drop("non-positive weight");
        continue;
      }
      weight = *wv;
    }
    if (h_col) {
      rec.stratum = row[*h_col];
      if (rec.stratum.empty()) {
        drop("missing stratum");
        continue;
      }
    }
    bool complete = true;
    for (std::size_t f = 0; f < schema.features.size() && complete; ++f) {
      const std::string& cell = row[f_cols[f]];
      if (cell.empty()) {
        drop("missing feature " + schema.features[f].name);
        complete = false;
      } else if (schema.features[f].kind == FeatureKind::numeric) {
        const auto v = parse_double(cell);
        if (!v) {
          drop("unparseable feature " + schema.features[f].name);
          complete = false;
        } else {
          rec.features.emplace_back(*v);
        }
      } else {
        rec.features.emplace_back(cell);
      }
    }
    if (!complete) continue;
    if (!ids.insert(rec.id).second) {
      drop("duplicate id");
      continue;
    }
    out.source_rows.push_back(r);
    weights.push_back(weight);
    records.push_back(std::move(rec));
  }
  report.rows_kept = records.size();
  if (records.empty()) throw DataError("no usable rows");

  out.sample.members.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    out.sample.members.push_back({records[i].id, i, weights[i], std::min(1.0, 1.0 / weights[i])});
  out.frame = RecordFrame(schema.features, std::move(records));
  out.table = std::move(table);
  return out;
}

inline LoadedData ingest_csv(const std::string& path, const DataSchema& schema, bool population = false,
                             bool require_outcome = true) {
  return ingest_table(read_csv_file(path), schema, population, require_outcome);
}

/// Reads an `id,score` predictions file. Throws DataError on a bad header,
/// an unparseable or out-of-range score, or a repeated id.
inline std::unordered_map<std::string, double> read_predictions(const std::string& path) {
  const CsvTable table = read_csv_file(path);
  const auto id = table.column("id");
  const auto score = table.column("score");
  if (!id || !score) throw DataError("predictions file " + path + " must have columns id,score");
  std::unordered_map<std::string, double> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size())
      throw DataError("predictions file: malformed row " + std::to_string(r + 2));
    const auto s = parse_double(row[*score]);
    if (!s || *s < 0.0 || *s > 1.0)
      throw DataError("predictions file: score for id " + row[*id] + " is not in [0, 1]");
    if (!out.emplace(row[*id], *s).second)
      throw DataError("predictions file: duplicate id " + row[*id]);
  }
  return out;
}

}  // namespace sveval
