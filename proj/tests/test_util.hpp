#pragma once

#include <string>
#include <vector>

#include "sveval/sveval.hpp"

namespace sveval::test {

/// One-feature frame; stratum labels and outcomes given per record.
inline RecordFrame make_frame(const std::vector<std::string>& strata, const std::vector<int>& outcomes,
                              const std::vector<double>& x = {}) {
  std::vector<Record> records;
  for (std::size_t i = 0; i < strata.size(); ++i) {
    Record r;
    r.id = "r" + std::to_string(i);
    r.stratum = strata[i];
    r.outcome = outcomes[i];
    r.features.emplace_back(x.empty() ? static_cast<double>(i) : x[i]);
    records.push_back(std::move(r));
  }
  return RecordFrame({{"x", FeatureKind::numeric}}, std::move(records));
}

/// Random scored cases with both classes present.
inline std::vector<ScoredCase> random_cases(Rng& rng, std::size_t n, bool constant_weight = false,
                                            bool discrete_scores = false) {
  std::vector<ScoredCase> cases(n);
  for (std::size_t i = 0; i < n; ++i) {
    cases[i].outcome = rng.bernoulli(0.4) ? 1 : 0;
    const double s = rng.uniform();
    cases[i].score = discrete_scores ? static_cast<double>(rng.index(11)) / 10.0
                                     : std::min(1.0, 0.6 * s + 0.4 * cases[i].outcome * rng.uniform());
    cases[i].weight = constant_weight ? 3.7 : 0.5 + 20.0 * rng.uniform();
  }
  cases[0].outcome = 1;
  cases[1].outcome = 0;
  return cases;
}

/// sum over (pos, neg) pairs of w_p w_n (1[s_p > s_n] + 1/2 1[s_p = s_n]),
/// divided by sum w_p w_n.
inline double pairwise_auc(const std::vector<ScoredCase>& cases, bool weighted = true) {
  double num = 0.0, den = 0.0;
  for (const auto& p : cases) {
    if (p.outcome != 1) continue;
    for (const auto& q : cases) {
      if (q.outcome != 0) continue;
      const double w = weighted ? p.weight * q.weight : 1.0;
      den += w;
      if (p.score > q.score)
        num += w;
      else if (p.score == q.score)
        num += 0.5 * w;
    }
  }
  return num / den;
}

/// All k-subsets of {0, ..., n-1} in lexicographic order.
inline std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = i;
  while (true) {
    out.push_back(c);
    std::size_t i = k;
    while (i > 0 && c[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++c[i - 1];
    for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

}  // namespace sveval::test
