// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sveval/sveval.hpp"

using namespace sveval;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0, double e = 0,
                double f = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d, e, f);
  return buf;
}

std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = i;
  for (;;) {
    out.push_back(c);
    std::size_t i = k;
    while (i > 0 && c[i - 1] == n - k + i - 1) --i;
    if (i == 0) return out;
    ++c[i - 1];
    for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
  }
}

// Toy population: N = 8, strata {0..3} and {4..7}, fixed scores.
struct Toy {
  std::vector<int> y{1, 0, 1, 1, 0, 0, 1, 0};
  std::vector<double> s{0.9, 0.7, 0.2, 0.6, 0.1, 0.8, 0.4, 0.3};
  FinitePopulation frame;
  ConfusionTally truth;

  Toy() {
    std::vector<Record> records;
    for (std::size_t i = 0; i < 8; ++i)
      records.push_back({"t" + std::to_string(i), {s[i]}, y[i], i < 4 ? "a" : "b"});
    frame = FinitePopulation({{"s", FeatureKind::numeric}}, records);
    std::vector<ScoredCase> all;
    for (std::size_t i = 0; i < 8; ++i) all.push_back({y[i], s[i], 1.0});
    truth = tally_confusion(all, 0.5);
  }

  double design_weight(const std::string& stratum) const {
    Rng rng(0);
    const SurveySample one = stratified_sample(frame, StratifiedDesign{{{"a", 2}, {"b", 2}}}, rng);
    for (const SampleMember& m : one.members)
      if (frame[m.row].stratum == stratum) return m.weight;
    return 0.0;
  }
};

double max_gap(const ConfusionTally& mean, const ConfusionTally& truth) {
  return std::max({std::abs(mean.tp - truth.tp), std::abs(mean.tn - truth.tn), std::abs(mean.fp - truth.fp),
                   std::abs(mean.fn - truth.fn)});
}

Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  const Toy toy;
  const double wa = toy.design_weight("a"), wb = toy.design_weight("b");
  ConfusionTally sum;
  std::size_t samples = 0;
  for (const auto& a : combinations(4, 2))
    for (const auto& b : combinations(4, 2)) {
      std::vector<ScoredCase> cases;
      for (std::size_t i : a) cases.push_back({toy.y[i], toy.s[i], wa});
      for (std::size_t i : b) cases.push_back({toy.y[4 + i], toy.s[4 + i], wb});
      const ConfusionTally t = tally_confusion(cases, 0.5);
      sum.tp += t.tp;
      sum.tn += t.tn;
      sum.fp += t.fp;
      sum.fn += t.fn;
      ++samples;
    }
  const double k = static_cast<double>(samples);
  const ConfusionTally mean{sum.tp / k, sum.tn / k, sum.fp / k, sum.fn / k};
  const double gap = max_gap(mean, toy.truth);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {samples == 36 && gap <= 1e-12 && seconds < 1.0,
          fmt("36 samples, max |mean N-hat - N| = %.3g (TP %.0f TN %.0f FP %.0f FN %.0f); %.4f s", gap, toy.truth.tp,
              toy.truth.tn, toy.truth.fp, toy.truth.fn, seconds)};
}

Outcome criterion2() {
  const Toy toy;
  const double wa = toy.design_weight("a"), wb = toy.design_weight("b");
  ConfusionTally sum;
  std::size_t count = 0;
  for (const auto& a : combinations(4, 2))
    for (const auto& b : combinations(4, 2)) {
      SurveySample sample;
      for (std::size_t i : a) sample.members.push_back({toy.frame[i].id, i, wa, 1.0 / wa});
      for (std::size_t i : b) sample.members.push_back({toy.frame[4 + i].id, 4 + i, wb, 1.0 / wb});
      const double factor = static_cast<double>(sample.size()) / 2.0;  // n / n_e
      for (const auto& e : combinations(sample.size(), 2)) {
        std::vector<ScoredCase> cases;
        for (std::size_t k : e) {
          const SampleMember& m = sample.members[k];
          cases.push_back({toy.y[m.row], toy.s[m.row], m.weight * factor});
        }
        const ConfusionTally t = tally_confusion(cases, 0.5);
        sum.tp += t.tp;
        sum.tn += t.tn;
        sum.fp += t.fp;
        sum.fn += t.fn;
        ++count;
      }
    }
  const double k = static_cast<double>(count);
  const ConfusionTally mean{sum.tp / k, sum.tn / k, sum.fp / k, sum.fn / k};
  const double gap = max_gap(mean, toy.truth);
  return {count == 216 && gap <= 1e-12, fmt("216 (sample, evaluation subset) pairs, max |mean N-hat - N| = %.3g", gap)};
}

Outcome criterion3() {
  double worst = 0.0;
  Rng rng(3003);
  for (int d = 0; d < 1000; ++d) {
    const std::size_t n = 20 + rng.index(181);
    const double w = 0.5 + 100.0 * rng.uniform();
    std::vector<ScoredCase> cases(n);
    for (auto& c : cases) {
      c.outcome = rng.bernoulli(0.35) ? 1 : 0;
      c.score = rng.index(3) == 0 ? std::round(rng.uniform() * 10.0) / 10.0 : rng.uniform();
      c.weight = w;
    }
    cases[0].outcome = 1;
    cases[1].outcome = 0;
    const double t = rng.uniform();
    const ConfusionTally tally = tally_confusion(cases, t);
    worst = std::max(worst, std::abs(sensitivity(tally, Weighting::weighted).value -
                                     sensitivity(tally, Weighting::unweighted).value));
    worst = std::max(worst, std::abs(specificity(tally, Weighting::weighted).value -
                                     specificity(tally, Weighting::unweighted).value));
    const GridSpec grid = d % 2 == 0 ? GridSpec{} : GridSpec{GridSpec::Mode::exact};
    worst = std::max(worst, std::abs(auroc(cases, grid, Weighting::weighted) -
                                     auroc(cases, grid, Weighting::unweighted)));
  }
  return {worst <= 1e-12, fmt("1000 datasets, max |weighted - unweighted| = %.3g", worst)};
}

struct RunStats {
  double truth_sn = 0, truth_sp = 0, unw_sn = 0, unw_sp = 0, w_sn = 0, w_sp = 0;
  double unw_auroc = 0, w_auroc = 0, pop_auroc = 0;
  double sd_sn = 0, sd_sp = 0, se_sn = 0, se_sp = 0;
  double cover_sn = 0, cover_sp = 0;
  std::size_t successes = 0, failures = 0;
};

RunStats run_default(const std::string& classifier, double* seconds) {
  ExperimentDocument doc = read_experiment(SVEVAL_SOURCE_DIR "/configs/experiment_default.json");
  std::vector<ClassifierSpec> keep;
  for (const ClassifierSpec& c : doc.spec.classifiers)
    if (c.name == classifier) keep.push_back(c);
  doc.spec.classifiers = keep;
  const auto start = std::chrono::steady_clock::now();
  const FinitePopulation pop = materialize_population(doc);
  const std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  const auto reports = run_experiment(doc.spec, pop, threads);
  *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const SummaryTable table = aggregate(reports);
  const ClassifierSummary& c = table.classifiers.at(0);
  RunStats s;
  s.successes = c.successes;
  s.failures = c.failures + table.sampling_failures;
  for (const MetricRow& r : c.rows) {
    if (r.metric == MetricKind::sensitivity) {
      s.truth_sn = *r.population.mean;
      s.unw_sn = *r.unweighted.mean;
      s.w_sn = *r.weighted.mean;
      s.sd_sn = *r.weighted.sd;
      s.se_sn = *r.weighted_se.mean;
    } else if (r.metric == MetricKind::specificity) {
      s.truth_sp = *r.population.mean;
      s.unw_sp = *r.unweighted.mean;
      s.w_sp = *r.weighted.mean;
      s.sd_sp = *r.weighted.sd;
      s.se_sp = *r.weighted_se.mean;
    } else {
      s.pop_auroc = *r.population.mean;
      s.unw_auroc = *r.unweighted.mean;
      s.w_auroc = *r.weighted.mean;
    }
  }
  std::size_t n_sn = 0, n_sp = 0, hit_sn = 0, hit_sp = 0;
  for (const ReplicateReport& rep : reports) {
    if (rep.error || !rep.classifiers[0].ok()) continue;
    const ThresholdResult& t = rep.classifiers[0].thresholds[0];
    if (t.weighted_sensitivity.value && t.weighted_sensitivity.standard_error) {
      ++n_sn;
      hit_sn += std::abs(*t.weighted_sensitivity.value - s.truth_sn) <= 1.96 * *t.weighted_sensitivity.standard_error;
    }
    if (t.weighted_specificity.value && t.weighted_specificity.standard_error) {
      ++n_sp;
      hit_sp += std::abs(*t.weighted_specificity.value - s.truth_sp) <= 1.96 * *t.weighted_specificity.standard_error;
    }
  }
  s.cover_sn = n_sn ? static_cast<double>(hit_sn) / static_cast<double>(n_sn) : 0.0;
  s.cover_sp = n_sp ? static_cast<double>(hit_sp) / static_cast<double>(n_sp) : 0.0;
  return s;
}

Outcome criterion4(const RunStats& s, double seconds) {
  const double wb_sn = std::abs(s.w_sn - s.truth_sn), ub_sn = std::abs(s.unw_sn - s.truth_sn);
  const double wb_sp = std::abs(s.w_sp - s.truth_sp), ub_sp = std::abs(s.unw_sp - s.truth_sp);
  const bool pass = wb_sn <= 0.01 && wb_sp <= 0.01 && ub_sn >= 3.0 * wb_sn && ub_sp >= 3.0 * wb_sp && seconds <= 600;
  return {pass, fmt("SN truth %.4f unweighted %.4f weighted %.4f; SP truth %.4f unweighted %.4f weighted %.4f", s.truth_sn,
                    s.unw_sn, s.w_sn, s.truth_sp, s.unw_sp, s.w_sp) +
                    fmt("; %.0f s", seconds)};
}

Outcome criterion5(const RunStats& s, double seconds) {
  const double wb_sn = std::abs(s.w_sn - s.truth_sn), ub_sn = std::abs(s.unw_sn - s.truth_sn);
  const double wb_sp = std::abs(s.w_sp - s.truth_sp), ub_sp = std::abs(s.unw_sp - s.truth_sp);
  const bool pass = wb_sn < ub_sn && wb_sp < ub_sp && seconds <= 1800;
  return {pass, fmt("SN truth %.4f unweighted %.4f weighted %.4f; SP truth %.4f unweighted %.4f weighted %.4f", s.truth_sn,
                    s.unw_sn, s.w_sn, s.truth_sp, s.unw_sp, s.w_sp) +
                    fmt("; %.0f s", seconds)};
}

Outcome criterion6(const RunStats& s) {
  const double gap = std::abs(s.w_auroc - s.unw_auroc);
  return {gap <= 0.02, fmt("AUROC population %.4f unweighted %.4f weighted %.4f; |difference| %.4f", s.pop_auroc,
                           s.unw_auroc, s.w_auroc, gap)};
}

Outcome criterion7(const RunStats& s) {
  const double r_sn = s.se_sn / s.sd_sn, r_sp = s.se_sp / s.sd_sp;
  const bool pass = std::abs(r_sn - 1.0) <= 0.3 && std::abs(r_sp - 1.0) <= 0.3 && s.cover_sn >= 0.90 &&
                    s.cover_sn <= 0.98 && s.cover_sp >= 0.90 && s.cover_sp <= 0.98;
  return {pass, fmt("SE/SD SN %.3f SP %.3f; 95%% coverage SN %.3f SP %.3f", r_sn, r_sp, s.cover_sn, s.cover_sp)};
}

double pairwise_oracle(const std::vector<ScoredCase>& cases) {
  double num = 0.0, den = 0.0;
  for (const ScoredCase& p : cases)
    for (const ScoredCase& q : cases) {
      if (p.outcome != 1 || q.outcome != 0) continue;
      const double w = p.weight * q.weight;
      den += w;
      num += p.score > q.score ? w : p.score == q.score ? 0.5 * w : 0.0;
    }
  return num / den;
}

Outcome criterion8() {
  Rng rng(8008);
  double worst_exact = 0.0;
  for (int d = 0; d < 100; ++d) {
    const std::size_t n = 2 + rng.index(49);
    std::vector<ScoredCase> cases(n);
    for (auto& c : cases) {
      c.outcome = rng.bernoulli(0.5) ? 1 : 0;
      c.score = d % 3 == 0 ? static_cast<double>(rng.index(6)) / 5.0 : rng.uniform();
      c.weight = std::exp(2.0 * rng.uniform());
    }
    cases[0].outcome = 1;
    cases[1].outcome = 0;
    worst_exact = std::max(worst_exact, std::abs(auroc(cases, GridSpec{GridSpec::Mode::exact}, Weighting::weighted) -
                                                 pairwise_oracle(cases)));
  }
  double worst_grid = 0.0;
  for (int d = 0; d < 20; ++d) {
    const std::size_t n = 1000 + rng.index(2001);
    std::vector<ScoredCase> cases(n);
    for (auto& c : cases) {
      c.outcome = rng.bernoulli(0.3) ? 1 : 0;
      const double z = rng.uniform() + (c.outcome ? 0.4 * rng.uniform() : 0.0);
      c.score = std::min(1.0, z / 1.4);
      c.weight = 1.0 + 30.0 * rng.uniform();
    }
    worst_grid = std::max(worst_grid, std::abs(auroc(cases, GridSpec{}, Weighting::weighted) -
                                               auroc(cases, GridSpec{GridSpec::Mode::exact}, Weighting::weighted)));
  }
  return {worst_exact <= 1e-9 && worst_grid <= 0.005,
          fmt("exact vs pairwise max gap %.3g over 100 sets; 101-point vs exact max gap %.4f over 20 sets", worst_exact,
              worst_grid)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome criterion9() {
  const fs::path dir = fs::temp_directory_path() / ("sveval_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string spec = SVEVAL_SOURCE_DIR "/configs/experiment_default.json";
  auto simulate = [&](const std::string& out, int threads) {
    const std::string cmd = std::string("\"") + SVEVAL_CLI + "\" simulate " + spec +
                            " --replicates 3 --seed 515 --threads " + std::to_string(threads) + " --json " +
                            (dir / out).string() + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  const bool ran = simulate("a.json", 1) && simulate("b.json", 1) && simulate("c.json", 8);
  const std::string a = slurp(dir / "a.json"), b = slurp(dir / "b.json"), c = slurp(dir / "c.json");
  fs::remove_all(dir);
  const bool pass = ran && !a.empty() && a == b && a == c;
  return {pass, std::string(ran ? "" : "simulate failed; ") + "two runs at 1 thread " + (a == b ? "identical" : "differ") +
                    ", 1 vs 8 threads " + (a == c ? "identical" : "differ") + " (" + std::to_string(a.size()) +
                    " bytes)"};
}

}  // namespace

int main() {
  bool all = true;
  auto report = [&](int id, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, criterion1);
  report(2, criterion2);
  report(3, criterion3);

  double lr_seconds = 0.0, rf_seconds = 0.0;
  std::optional<RunStats> lr;
  std::string lr_error;
  try {
    lr = run_default("logistic", &lr_seconds);
  } catch (const std::exception& e) {
    lr_error = e.what();
  }
  auto need_lr = [&]() -> const RunStats& {
    if (!lr) throw std::runtime_error(lr_error);
    return *lr;
  };
  report(4, [&] { return criterion4(need_lr(), lr_seconds); });
  report(5, [&] {
    const RunStats rf = run_default("balanced_random_forest", &rf_seconds);
    return criterion5(rf, rf_seconds);
  });
  report(6, [&] { return criterion6(need_lr()); });
  report(7, [&] { return criterion7(need_lr()); });
  report(8, criterion8);
  report(9, criterion9);
  return all ? 0 : 1;
}
