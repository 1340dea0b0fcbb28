#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "sveval/sveval.hpp"
#include "test_util.hpp"

using namespace sveval;

namespace {

FinitePopulation stratified_population(const std::vector<std::pair<std::string, std::size_t>>& sizes) {
  std::vector<std::string> strata;
  std::vector<int> y;
  for (const auto& [label, n] : sizes)
    for (std::size_t i = 0; i < n; ++i) {
      strata.push_back(label);
      y.push_back(static_cast<int>(strata.size() % 3 == 0));
    }
  return test::make_frame(strata, y);
}

}  // namespace

TEST(StratifiedSample, CensusHasUnitWeights) {
  const FinitePopulation pop = stratified_population({{"a", 10}});
  Rng rng(1);
  const SurveySample s = stratified_sample(pop, {{{"a", 10}}}, rng);
  ASSERT_EQ(s.size(), 10u);
  for (const auto& m : s.members) {
    EXPECT_EQ(m.weight, 1.0);
    EXPECT_EQ(m.inclusion_probability, 1.0);
  }
}

TEST(StratifiedSample, TwoStrataWeights) {
  const FinitePopulation pop = stratified_population({{"a", 4}, {"b", 6}});
  Rng rng(2);
  const SurveySample s = stratified_sample(pop, {{{"a", 2}, {"b", 3}}}, rng);
  ASSERT_EQ(s.size(), 5u);
  for (const auto& m : s.members) EXPECT_EQ(m.weight, 2.0);
  EXPECT_TRUE(validate_sample(s, &pop).ok());
}

TEST(StratifiedSample, PublishedDesignWeights) {
  const std::vector<std::size_t> N{38475, 23953, 30787, 13371, 10175};
  const std::vector<std::size_t> n{2300, 1500, 1950, 1750, 2500};
  const std::vector<double> expected{16.728, 15.969, 15.788, 7.641, 4.070};
  std::vector<std::pair<std::string, std::size_t>> sizes;
  StratifiedDesign design;
  for (std::size_t h = 0; h < N.size(); ++h) {
    sizes.emplace_back("h" + std::to_string(h), N[h]);
    design.allocations["h" + std::to_string(h)] = n[h];
  }
  const FinitePopulation pop = stratified_population(sizes);
  Rng rng(3);
  const SurveySample s = stratified_sample(pop, design, rng);
  EXPECT_EQ(s.size(), 10000u);
  std::map<std::string, double> weight;
  for (const auto& m : s.members) weight[pop[m.row].stratum] = m.weight;
  for (std::size_t h = 0; h < N.size(); ++h) {
    const double w = weight.at("h" + std::to_string(h));
    EXPECT_NEAR(w, expected[h], 5e-4);
    EXPECT_DOUBLE_EQ(w, 1.0 / (static_cast<double>(n[h]) / static_cast<double>(N[h])));
  }
}

TEST(StratifiedSample, InvalidDesigns) {
  const FinitePopulation pop = stratified_population({{"a", 4}, {"b", 6}});
  Rng rng(4);
  EXPECT_THROW(stratified_sample(pop, {{{"a", 5}}}, rng), DataError);
  EXPECT_THROW(stratified_sample(pop, {{{"a", 0}}}, rng), DataError);
  EXPECT_THROW(stratified_sample(pop, {{{"c", 1}}}, rng), DataError);
  EXPECT_THROW(stratified_sample(pop, {}, rng), DataError);
}

TEST(StratifiedSample, SameSeedSameSample) {
  const FinitePopulation pop = stratified_population({{"a", 50}, {"b", 80}});
  Rng r1(11), r2(11);
  const SurveySample s1 = stratified_sample(pop, {{{"a", 7}, {"b", 13}}}, r1);
  const SurveySample s2 = stratified_sample(pop, {{{"a", 7}, {"b", 13}}}, r2);
  ASSERT_EQ(s1.size(), s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i) EXPECT_EQ(s1.members[i].row, s2.members[i].row);
}

TEST(StratifiedSample, ExhaustiveEnumerationIsUnbiased) {
  // N = (4, 5), n = (2, 3): every stratified sample, HT total of x.
  const FinitePopulation pop = stratified_population({{"a", 4}, {"b", 5}});
  const std::vector<double> x{3.5, -1.0, 2.25, 7.0, 0.5, 4.0, -2.5, 1.0, 9.0};
  double truth = 0.0;
  for (double v : x) truth += v;
  Rng rng(1);
  const StratifiedDesign design{{{"a", 2}, {"b", 3}}};
  const SurveySample probe = stratified_sample(pop, design, rng);
  std::map<std::string, double> w;
  for (const auto& m : probe.members) w[pop[m.row].stratum] = m.weight;

  const auto ca = test::combinations(4, 2);
  const auto cb = test::combinations(5, 3);
  double sum = 0.0;
  for (const auto& a : ca)
    for (const auto& b : cb) {
      std::vector<WeightedValue> values;
      for (std::size_t i : a) values.push_back({x[i], w["a"]});
      for (std::size_t i : b) values.push_back({x[4 + i], w["b"]});
      sum += ht_total(values);
    }
  EXPECT_NEAR(sum / static_cast<double>(ca.size() * cb.size()), truth, 1e-12);
}

TEST(StratifiedSample, SelectionFrequencyMatchesInclusionProbability) {
  const FinitePopulation pop = stratified_population({{"a", 6}, {"b", 10}});
  const StratifiedDesign design{{{"a", 2}, {"b", 7}}};
  const int R = 4000;
  std::vector<int> hits(pop.size(), 0);
  for (int r = 0; r < R; ++r) {
    Rng rng = Rng::stream(99, static_cast<std::uint64_t>(r), Stage::sampling);
    for (const auto& m : stratified_sample(pop, design, rng).members) ++hits[m.row];
  }
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const double pi = pop[i].stratum == "a" ? 2.0 / 6.0 : 7.0 / 10.0;
    EXPECT_NEAR(hits[i] / static_cast<double>(R), pi, 4.0 / std::sqrt(R)) << "row " << i;
  }
}

TEST(SimpleRandomSample, SizeAndWeights) {
  const FinitePopulation pop = stratified_population({{"a", 40}});
  Rng rng(8);
  const SurveySample s = simple_random_sample(pop, 10, rng);
  EXPECT_EQ(s.size(), 10u);
  for (const auto& m : s.members) EXPECT_EQ(m.weight, 4.0);
  EXPECT_THROW(simple_random_sample(pop, 41, rng), DataError);
}

TEST(RoundHalfEven, Ties) {
  EXPECT_EQ(round_half_even(2.5), 2u);
  EXPECT_EQ(round_half_even(3.5), 4u);
  EXPECT_EQ(round_half_even(2.4), 2u);
  EXPECT_EQ(round_half_even(2.6), 3u);
  EXPECT_EQ(round_half_even(0.5), 0u);
}

TEST(SplitTrainTest, ConstantWeights) {
  SurveySample s;
  for (int i = 0; i < 100; ++i) s.members.push_back({"m" + std::to_string(i), static_cast<std::size_t>(i), 50.0, 0.02});
  Rng rng(1);
  const TrainTestSplit split = split_train_test(s, 0.2, rng);
  EXPECT_EQ(split.eval_size, 20u);
  EXPECT_EQ(split.evaluation.size(), 20u);
  EXPECT_EQ(split.training.size(), 80u);
  for (const auto& m : split.evaluation) EXPECT_EQ(m.compound_weight, 250.0);
}

TEST(SplitTrainTest, HeterogeneousWeightsRatioIsExact) {
  SurveySample s;
  Rng gen(2);
  for (int i = 0; i < 10000; ++i) {
    const double w = 1.0 + 40.0 * gen.uniform();
    s.members.push_back({"m" + std::to_string(i), static_cast<std::size_t>(i), w, 1.0 / w});
  }
  Rng rng(3);
  const TrainTestSplit split = split_train_test(s, 0.2, rng);
  EXPECT_EQ(split.eval_size, 2000u);
  EXPECT_EQ(split.weight_factor, 5.0);
  // Quotients w*/w of rounded products may sit one ulp from 5; the product is exact.
  for (const auto& m : split.evaluation) {
    EXPECT_EQ(m.compound_weight, m.weight * 5.0);
    EXPECT_NEAR(m.compound_weight / m.weight, 5.0, 1e-15);
  }
}

TEST(SplitTrainTest, PartitionsTheSample) {
  SurveySample s;
  for (int i = 0; i < 57; ++i) s.members.push_back({"m" + std::to_string(i), static_cast<std::size_t>(i), 1.5, 1 / 1.5});
  Rng rng(4);
  const TrainTestSplit split = split_train_test(s, 0.3, rng);
  EXPECT_EQ(split.eval_size, round_half_even(0.3 * 57));
  std::set<std::string> train, eval;
  for (const auto& m : split.training.members) train.insert(m.id);
  for (const auto& m : split.evaluation) eval.insert(m.id);
  EXPECT_EQ(train.size() + eval.size(), 57u);
  for (const auto& id : eval) EXPECT_FALSE(train.count(id));
}

TEST(SplitTrainTest, RejectsDegenerateFractions) {
  SurveySample s;
  for (int i = 0; i < 3; ++i) s.members.push_back({"m" + std::to_string(i), static_cast<std::size_t>(i), 1.0, 1.0});
  Rng rng(5);
  EXPECT_THROW(split_train_test(s, 1.0, rng), DataError);
  EXPECT_THROW(split_train_test(s, 0.0, rng), DataError);
  EXPECT_THROW(split_train_test(s, 0.9, rng), DataError);  // n_e rounds to n
  EXPECT_THROW(split_train_test(s, 0.1, rng), DataError);  // n_e rounds to 0
}

TEST(InclusionProbabilityOfEvaluation, Examples) {
  EXPECT_NEAR(inclusion_probability_of_evaluation(100, 20, 0.1), 0.02, 1e-15);
  EXPECT_EQ(inclusion_probability_of_evaluation(50, 50, 0.3), 0.3);
  EXPECT_EQ(inclusion_probability_of_evaluation(10, 5, 1.0), 0.5);
  EXPECT_THROW(inclusion_probability_of_evaluation(10, 11, 0.5), DataError);
  EXPECT_THROW(inclusion_probability_of_evaluation(10, 5, 0.0), DataError);
}
