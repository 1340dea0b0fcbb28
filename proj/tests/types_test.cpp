#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "sveval/sveval.hpp"
#include "test_util.hpp"

using namespace sveval;

namespace {

FinitePopulation four_records() {
  return test::make_frame({"a", "a", "b", "b"}, {1, 0, 1, 0});
}

}  // namespace

TEST(RecordFrame, RejectsDuplicateIds) {
  std::vector<Record> records{{"x", {1.0}, 0, "a"}, {"x", {2.0}, 1, "a"}};
  EXPECT_THROW(RecordFrame({{"f", FeatureKind::numeric}}, records), DataError);
}

TEST(RecordFrame, RejectsNonBinaryOutcome) {
  std::vector<Record> records{{"x", {1.0}, 2, "a"}};
  EXPECT_THROW(RecordFrame({{"f", FeatureKind::numeric}}, records), DataError);
}

TEST(RecordFrame, RejectsWrongFeatureLengthOrKind) {
  EXPECT_THROW(RecordFrame({{"f", FeatureKind::numeric}}, {{"x", {}, 0, "a"}}), DataError);
  EXPECT_THROW(RecordFrame({{"f", FeatureKind::numeric}}, {{"x", {std::string("u")}, 0, "a"}}), DataError);
  EXPECT_THROW(RecordFrame({{"f", FeatureKind::numeric}}, {{"x", {std::nan("")}, 0, "a"}}), DataError);
}

TEST(RecordFrame, IndexesIdsAndStrata) {
  const FinitePopulation pop = four_records();
  EXPECT_EQ(pop.size(), 4u);
  EXPECT_EQ(pop.find("r2"), std::optional<std::size_t>(2));
  EXPECT_FALSE(pop.find("nope"));
  EXPECT_EQ(pop.strata().at("a"), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(pop.strata().at("b"), (std::vector<std::size_t>{2, 3}));
}

TEST(ValidateSample, ConsistentSampleIsOk) {
  const FinitePopulation pop = four_records();
  SurveySample s;
  for (std::size_t i = 0; i < 2; ++i) s.members.push_back({pop[i].id, i, 2.0, 0.5});
  EXPECT_TRUE(validate_sample(s, &pop).ok());
}

TEST(ValidateSample, ReportsZeroWeight) {
  SurveySample s;
  s.members.push_back({"r0", 0, 0.0, 0.5});
  const ValidationReport r = validate_sample(s);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.problems.front(), "non-positive weight at id r0");
}

TEST(ValidateSample, ReportsDuplicateAndUnknownIds) {
  const FinitePopulation pop = four_records();
  SurveySample s;
  s.members.push_back({"r1", 1, 2.0, 0.5});
  s.members.push_back({"r1", 1, 2.0, 0.5});
  s.members.push_back({"zz", 0, 2.0, 0.5});
  const ValidationReport r = validate_sample(s, &pop);
  ASSERT_EQ(r.problems.size(), 2u);
  EXPECT_EQ(r.problems[0], "duplicate id r1");
  EXPECT_EQ(r.problems[1], "id zz not in population");
}

TEST(EvaluationSet, ValidatesCases) {
  EXPECT_NO_THROW(EvaluationSet({"a"}, {{1, 0.5, 2.0}}));
  EXPECT_THROW(EvaluationSet({"a"}, {{1, 1.5, 2.0}}), DataError);
  EXPECT_THROW(EvaluationSet({"a"}, {{1, 0.5, 0.0}}), DataError);
  EXPECT_THROW(EvaluationSet({"a"}, {{3, 0.5, 1.0}}), DataError);
  EXPECT_THROW(EvaluationSet({"a", "b"}, {{1, 0.5, 1.0}}), DataError);
}

TEST(ConfusionTally, TotalsMatchWeightsAndCounts) {
  Rng rng(5);
  const auto cases = test::random_cases(rng, 500);
  const ConfusionTally t = tally_confusion(cases, 0.4);
  double w = 0.0;
  for (const auto& c : cases) w += c.weight;
  EXPECT_EQ(t.count(), cases.size());
  EXPECT_NEAR(t.weighted_total(), w, 1e-9 * w);
}

TEST(ConfusionTally, UnitWeightsEqualCountsExactly) {
  Rng rng(6);
  auto cases = test::random_cases(rng, 300);
  for (auto& c : cases) c.weight = 1.0;
  const ConfusionTally t = tally_confusion(cases, 0.5);
  EXPECT_EQ(t.tp, static_cast<double>(t.tp_count));
  EXPECT_EQ(t.tn, static_cast<double>(t.tn_count));
  EXPECT_EQ(t.fp, static_cast<double>(t.fp_count));
  EXPECT_EQ(t.fn, static_cast<double>(t.fn_count));
}
