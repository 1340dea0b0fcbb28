// sveval: command-line front end.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure,
// 1 anything else.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sveval/sveval.hpp"

namespace fs = std::filesystem;
using namespace sveval;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaOptions {
  std::string schema_file;
  std::string id = "id";
  std::string outcome = "y";
  std::string weight;
  std::string stratum;
  std::vector<std::string> numeric;
  std::vector<std::string> categorical;

  void add_to(CLI::App* cmd, const std::string& default_weight) {
    weight = default_weight;
    cmd->add_option("--schema", schema_file, "Schema JSON file (overrides the column flags)");
    cmd->add_option("--id", id, "Id column")->capture_default_str();
    cmd->add_option("--outcome", outcome, "Binary outcome column")->capture_default_str();
    cmd->add_option("--weight", weight, "Weight column")->capture_default_str();
    cmd->add_option("--stratum", stratum, "Stratum column");
    cmd->add_option("--numeric", numeric, "Numeric feature columns")->delimiter(',');
    cmd->add_option("--categorical", categorical, "Categorical feature columns")->delimiter(',');
  }

  /// Features follow the file's column order.
  DataSchema build(const CsvTable& table) const {
    if (!schema_file.empty()) {
      std::ifstream in(schema_file);
      if (!in) throw DataError("cannot read file " + schema_file);
      try {
        return DataSchema::from_json(nlohmann::json::parse(in));
      } catch (const nlohmann::json::exception& e) {
        throw DataError(schema_file + ": " + e.what());
      }
    }
    DataSchema s;
    s.id_column = id;
    s.outcome_column = outcome;
    if (!weight.empty()) s.weight_column = weight;
    if (!stratum.empty()) s.stratum_column = stratum;
    for (const auto& n : numeric) s.features.push_back({n, FeatureKind::numeric});
    for (const auto& c : categorical) s.features.push_back({c, FeatureKind::categorical});
    auto position = [&](const FeatureSpec& f) {
      const auto c = table.column(f.name);
      return c ? *c : table.header.size();
    };
    std::stable_sort(s.features.begin(), s.features.end(),
                     [&](const FeatureSpec& a, const FeatureSpec& b) { return position(a) < position(b); });
    s.validate();
    return s;
  }
};

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto v = parse_double(item);
    if (!v || *v < 0.0 || *v > 1.0) throw UsageError("threshold '" + item + "' is not a number in [0, 1]");
    out.push_back(*v);
  }
  if (out.empty()) throw UsageError("no thresholds given");
  return out;
}

GridSpec parse_grid(const std::string& mode, std::size_t points) {
  GridSpec g;
  if (mode == "exact") {
    g.mode = GridSpec::Mode::exact;
  } else if (mode == "uniform") {
    if (points < 2) throw UsageError("--grid-points must be at least 2");
    g.points = points;
  } else {
    throw UsageError("--grid must be 'uniform' or 'exact'");
  }
  return g;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file " + path);
  out << text;
  if (!out) throw DataError("error writing file " + path);
}

std::string json_text(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

void report_load(const std::string& path, const LoadReport& r) {
  if (r.rows_dropped == 0) return;
  std::cerr << path << ": kept " << r.rows_kept << " of " << r.rows_read << " rows; dropped";
  bool first = true;
  for (const auto& [reason, count] : r.reasons) {
    std::cerr << (first ? " " : ", ") << count << " (" << reason << ")";
    first = false;
  }
  std::cerr << "\n";
}

LoadedData load(const std::string& path, const DataSchema& schema, bool population, bool require_outcome = true) {
  LoadedData data = ingest_table(read_csv_file(path), schema, population, require_outcome);
  report_load(path, data.report);
  return data;
}

/// Scored evaluation cases: outcomes and weights from the data file,
/// scores joined by id from the predictions file.
std::vector<ScoredCase> scored_cases(const std::string& data_path, const std::string& predictions_path,
                                     const SchemaOptions& opts) {
  if (opts.weight.empty() && opts.schema_file.empty()) throw UsageError("--weight is required");
  const CsvTable table = read_csv_file(data_path);
  DataSchema schema = opts.build(table);
  schema.features.clear();
  const LoadedData data = [&] {
    LoadedData d = ingest_table(table, schema, false);
    report_load(data_path, d.report);
    return d;
  }();
  const auto scores = read_predictions(predictions_path);
  std::vector<ScoredCase> cases;
  cases.reserve(data.frame.size());
  for (const SampleMember& m : data.sample.members) {
    const auto it = scores.find(m.id);
    if (it == scores.end()) throw DataError("no prediction for id " + m.id);
    cases.push_back({data.frame[m.row].outcome, it->second, m.weight});
  }
  return cases;
}

int run_simulate(const std::string& spec_path, std::optional<std::uint64_t> seed,
                 std::optional<std::size_t> replicates, std::size_t threads, const std::string& json_path,
                 const std::string& csv_path) {
  ExperimentDocument doc = read_experiment(spec_path);
  if (seed) doc.spec.master_seed = *seed;
  if (replicates) {
    if (*replicates < 1) throw UsageError("--replicates must be at least 1");
    doc.spec.replicates = *replicates;
  }
  if (threads < 1) throw UsageError("--threads must be at least 1");
  const FinitePopulation population = materialize_population(doc);
  const std::vector<ReplicateReport> reports = run_experiment(doc.spec, population, threads);
  if (!csv_path.empty()) {
    std::ostringstream csv;
    write_replicates_csv(csv, reports);
    write_text(csv_path, csv.str());
  }
  const SummaryTable table = aggregate(reports);
  if (json_path != "-") std::cout << format_summary(table);
  if (!json_path.empty()) write_text(json_path, json_text(summary_to_json(table, doc, population.size())));
  return 0;
}

int run_split(const std::string& path, const SchemaOptions& opts, std::uint64_t seed, double fraction,
              const std::string& out_dir) {
  if (opts.weight.empty() && opts.schema_file.empty()) throw UsageError("--weight is required");
  if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("--eval-fraction must lie in (0, 1)");
  const CsvTable table = read_csv_file(path);
  const DataSchema schema = opts.build(table);
  const LoadedData data = [&] {
    LoadedData d = ingest_table(table, schema, false);
    report_load(path, d.report);
    return d;
  }();
  Rng rng = Rng::stream(seed, 0, Stage::splitting);
  const TrainTestSplit split = split_train_test(data.sample, fraction, rng);

  fs::create_directories(out_dir);
  auto write = [&](const std::string& name, const std::string& extra, auto&& rows) {
    std::ostringstream out;
    std::vector<std::string> header = data.table.header;
    const bool replace = std::find(header.begin(), header.end(), extra) != header.end();
    if (!replace) header.push_back(extra);
    write_csv_row(out, header);
    for (const auto& [row, weight] : rows) {
      std::vector<std::string> fields = data.table.rows[data.source_rows[row]];
      if (replace)
        fields[*data.table.column(extra)] = format_exact(weight);
      else
        fields.push_back(format_exact(weight));
      write_csv_row(out, fields);
    }
    write_text((fs::path(out_dir) / name).string(), out.str());
  };
  std::vector<std::pair<std::size_t, double>> train, eval;
  for (const SampleMember& m : split.training.members) train.emplace_back(m.row, m.weight);
  for (const EvaluationMember& m : split.evaluation) eval.emplace_back(m.row, m.compound_weight);
  write("train.csv", "weight", train);
  write("eval.csv", "weight_eval", eval);
  std::cout << "n = " << split.sample_size << ", training " << split.training.size() << ", evaluation "
            << split.eval_size << ", weight factor n/n_e = " << format_exact(split.weight_factor) << "\n";
  return 0;
}

int run_train(const std::string& path, const SchemaOptions& opts, ClassifierSpec spec,
              std::optional<std::uint64_t> seed, std::size_t threads, const std::string& model_path) {
  if (opts.schema_file.empty() && opts.numeric.empty() && opts.categorical.empty())
    throw UsageError("declare features with --numeric / --categorical or --schema");
  const bool stochastic = spec.balanced || spec.type == ClassifierType::forest;
  if (stochastic && !seed) throw UsageError("--seed is required for forests and --balanced");
  if (threads < 1) throw UsageError("--threads must be at least 1");
  const CsvTable table = read_csv_file(path);
  const DataSchema schema = opts.build(table);
  const LoadedData data = [&] {
    LoadedData d = ingest_table(table, schema, true);
    report_load(path, d.report);
    return d;
  }();
  std::vector<std::size_t> rows(data.frame.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const std::uint64_t s = seed.value_or(0);
  Rng upsampling = Rng::stream(s, 0, Stage::upsampling);
  const TrainedModel model =
      train_classifier(spec, data.frame, rows, upsampling, derive_seed({s, static_cast<std::uint64_t>(Stage::forest)}),
                       threads);
  write_text(model_path, json_text(model_to_json(model)));
  std::cout << "trained " << to_string(spec.type) << (spec.balanced ? " (balanced)" : "") << " on "
            << rows.size() << " records\n";
  return 0;
}

int run_predict(const std::string& path, const SchemaOptions& opts, const std::string& model_path,
                const std::string& out_path) {
  std::ifstream in(model_path);
  if (!in) throw DataError("cannot read file " + model_path);
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(model_path + ": " + e.what());
  }
  const TrainedModel model = model_from_json(doc);
  DataSchema schema;
  schema.id_column = opts.id;
  schema.features = model.encoder.features();
  const LoadedData data = load(path, schema, true, false);
  std::vector<std::size_t> rows(data.frame.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  std::size_t unseen = 0;
  const std::vector<double> scores = predict_rows(model, data.frame, rows, &unseen);
  if (unseen) std::cerr << unseen << " records had category levels unseen in training\n";
  std::ostringstream out;
  out << "id,score\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    out << csv_escape(data.frame[i].id) << ',' << format_exact(scores[i]) << '\n';
  write_text(out_path, out.str());
  return 0;
}

int run_evaluate(const std::string& path, const std::string& predictions, const SchemaOptions& opts,
                 const std::string& thresholds, const GridSpec& grid, const std::string& json_path) {
  const std::vector<double> ts = parse_thresholds(thresholds);
  const std::vector<ScoredCase> cases = scored_cases(path, predictions, opts);
  const EvaluationReport report = evaluate_cases(cases, ts, grid);
  if (json_path != "-") std::cout << format_evaluation(report);
  if (!json_path.empty()) write_text(json_path, json_text(evaluation_to_json(report)));
  return 0;
}

int run_roc(const std::string& path, const std::string& predictions, const SchemaOptions& opts,
            bool unweighted, const GridSpec& grid, const std::string& out_path) {
  const std::vector<ScoredCase> cases = scored_cases(path, predictions, opts);
  const Weighting weighting = unweighted ? Weighting::unweighted : Weighting::weighted;
  const RocCurve curve = roc_sweep(cases, make_grid(grid, cases), weighting);
  std::ostringstream out;
  write_roc_csv(out, curve);
  write_text(out_path, out.str());
  if (out_path != "-")
    std::cout << to_string(weighting) << " AUROC " << format4(auroc(curve)) << " (" << grid.describe()
              << " grid, " << curve.points.size() << " points)\n";
  return 0;
}

int run_diagnose(const std::string& path, const std::string& weight_column, const std::string& json_path) {
  const CsvTable table = read_csv_file(path);
  const auto col = table.column(weight_column);
  if (!col) throw DataError("column '" + weight_column + "' not found in header");
  std::vector<double> weights;
  LoadReport report;
  for (const auto& row : table.rows) {
    ++report.rows_read;
    std::optional<double> w;
    if (row.size() == table.header.size()) w = parse_double(row[*col]);
    if (!w || !(*w > 0.0)) {
      ++report.rows_dropped;
      ++report.reasons[!w ? "unparseable weight" : "non-positive weight"];
      continue;
    }
    weights.push_back(*w);
  }
  report.rows_kept = weights.size();
  report_load(path, report);
  if (weights.empty()) throw DataError("no usable rows");
  const WeightDiagnostics d = weight_diagnostics(weights);
  if (json_path != "-") std::cout << format_weight_diagnostics(d);
  if (!json_path.empty()) write_text(json_path, json_text(weight_diagnostics_to_json(d)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Survey-weighted evaluation of binary classifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sveval 1.0.0");

  // simulate
  std::string sim_spec, sim_json, sim_csv;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::size_t> sim_replicates;
  std::size_t sim_threads = 1;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment and print the summary table");
  simulate->add_option("experiment", sim_spec, "Experiment JSON")->required();
  simulate->add_option("--seed", sim_seed, "Master seed (overrides the experiment's master_seed)");
  simulate->add_option("--replicates", sim_replicates, "Replicate count (overrides the experiment)");
  simulate->add_option("--threads", sim_threads, "Worker threads")->capture_default_str();
  simulate->add_option("--json", sim_json, "Write the summary JSON here ('-' for stdout)");
  simulate->add_option("--replicates-csv", sim_csv, "Write per-replicate results here");

  // split
  std::string split_data, split_out = ".";
  SchemaOptions split_schema;
  std::uint64_t split_seed = 0;
  double split_fraction = 0.2;
  auto* split = app.add_subcommand("split", "Split a weighted sample into train.csv and eval.csv");
  split->add_option("data", split_data, "Survey CSV")->required();
  split_schema.add_to(split, "");
  split->add_option("--seed", split_seed, "Random seed")->required();
  split->add_option("--eval-fraction", split_fraction, "Evaluation share f")->capture_default_str();
  split->add_option("--out-dir", split_out, "Output directory")->capture_default_str();

  // train
  std::string train_data, train_model, train_type = "logistic";
  SchemaOptions train_schema;
  std::optional<std::uint64_t> train_seed;
  ClassifierSpec train_spec;
  std::size_t train_threads = 1;
  auto* train = app.add_subcommand("train", "Fit a classifier and save it as JSON");
  train->add_option("data", train_data, "Training CSV")->required();
  train_schema.add_to(train, "");
  train->add_option("--model", train_model, "Output model JSON")->required();
  train->add_option("--type", train_type, "logistic | tree | forest")
      ->check(CLI::IsMember({"logistic", "tree", "forest"}))
      ->capture_default_str();
  train->add_flag("--balanced", train_spec.balanced, "Upsample the minority class before fitting");
  train->add_option("--seed", train_seed, "Random seed (required for forests and --balanced)");
  train->add_option("--trees", train_spec.forest.trees, "Forest size")->capture_default_str();
  train->add_option("--mtry", train_spec.forest.mtry, "Features tried per split (0: floor(sqrt(p)))")
      ->capture_default_str();
  train->add_option("--min-node-size", train_spec.forest.min_node_size, "Minimum node size")
      ->capture_default_str();
  train->add_option("--max-depth", train_spec.forest.max_depth, "Maximum depth (0: unlimited)")
      ->capture_default_str();
  train->add_option("--threads", train_threads, "Worker threads for forests")->capture_default_str();

  // predict
  std::string predict_data, predict_model, predict_out = "-";
  SchemaOptions predict_schema;
  auto* predict = app.add_subcommand("predict", "Score records with a saved model");
  predict->add_option("data", predict_data, "CSV with the model's feature columns")->required();
  predict->add_option("--model", predict_model, "Model JSON")->required();
  predict->add_option("--id", predict_schema.id, "Id column")->capture_default_str();
  predict->add_option("--out", predict_out, "Output id,score CSV ('-' for stdout)")->capture_default_str();

  // evaluate
  std::string eval_data, eval_predictions, eval_thresholds = "0.5", eval_grid = "uniform", eval_json;
  std::size_t eval_points = 101;
  SchemaOptions eval_schema;
  auto* evaluate = app.add_subcommand("evaluate", "Weighted and unweighted SN, SP and AUROC");
  evaluate->add_option("data", eval_data, "Evaluation CSV")->required();
  evaluate->add_option("--predictions", eval_predictions, "id,score CSV")->required();
  eval_schema.add_to(evaluate, "weight_eval");
  evaluate->add_option("--thresholds", eval_thresholds, "Comma-separated thresholds")->capture_default_str();
  evaluate->add_option("--grid", eval_grid, "AUROC grid: uniform | exact")->capture_default_str();
  evaluate->add_option("--grid-points", eval_points, "Uniform grid size")->capture_default_str();
  evaluate->add_option("--json", eval_json, "Write the JSON report here ('-' for stdout)");

  // roc
  std::string roc_data, roc_predictions, roc_grid = "uniform", roc_out = "-";
  std::size_t roc_points = 101;
  bool roc_unweighted = false;
  SchemaOptions roc_schema;
  auto* roc = app.add_subcommand("roc", "Write the ROC curve as CSV");
  roc->add_option("data", roc_data, "Evaluation CSV")->required();
  roc->add_option("--predictions", roc_predictions, "id,score CSV")->required();
  roc_schema.add_to(roc, "weight_eval");
  roc->add_option("--grid", roc_grid, "uniform | exact")->capture_default_str();
  roc->add_option("--grid-points", roc_points, "Uniform grid size")->capture_default_str();
  roc->add_flag("--unweighted", roc_unweighted, "Count records instead of weighting them");
  roc->add_option("--out", roc_out, "Output CSV ('-' for stdout)")->capture_default_str();

  // diagnose-weights
  std::string diag_data, diag_weight = "weight", diag_json;
  auto* diagnose = app.add_subcommand("diagnose-weights", "Summarize the weight distribution");
  diagnose->add_option("data", diag_data, "CSV with a weight column")->required();
  diagnose->add_option("--weight", diag_weight, "Weight column")->capture_default_str();
  diagnose->add_option("--json", diag_json, "Write the JSON report here ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim_spec, sim_seed, sim_replicates, sim_threads, sim_json, sim_csv);
    if (split->parsed()) return run_split(split_data, split_schema, split_seed, split_fraction, split_out);
    if (train->parsed()) {
      train_spec.type = parse_classifier_type(train_type);
      train_spec.name = train_type;
      return run_train(train_data, train_schema, train_spec, train_seed, train_threads, train_model);
    }
    if (predict->parsed()) return run_predict(predict_data, predict_schema, predict_model, predict_out);
    if (evaluate->parsed())
      return run_evaluate(eval_data, eval_predictions, eval_schema, eval_thresholds,
                          parse_grid(eval_grid, eval_points), eval_json);
    if (roc->parsed())
      return run_roc(roc_data, roc_predictions, roc_schema, roc_unweighted, parse_grid(roc_grid, roc_points),
                     roc_out);
    if (diagnose->parsed()) return run_diagnose(diag_data, diag_weight, diag_json);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
