#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sveval/sveval.hpp"
#include "test_util.hpp"

using namespace sveval;

TEST(UniformGrid, EndpointsAndSpacing) {
  const auto g = uniform_grid();
  ASSERT_EQ(g.size(), 101u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_DOUBLE_EQ(g[50], 0.5);
  EXPECT_THROW(uniform_grid(1), DataError);
}

TEST(RocSweep, ThreeThresholdExample) {
  const std::vector<ScoredCase> cases{{1, 0.9, 1}, {1, 0.4, 1}, {0, 0.6, 1}, {0, 0.1, 1}};
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const RocCurve c = roc_sweep(cases, grid, Weighting::unweighted);
  ASSERT_EQ(c.points.size(), 3u);
  EXPECT_EQ(c.points[0].sensitivity, 1.0);
  EXPECT_EQ(c.points[0].specificity, 0.0);
  EXPECT_EQ(c.points[1].sensitivity, 0.5);
  EXPECT_EQ(c.points[1].specificity, 0.5);
  EXPECT_EQ(c.points[2].sensitivity, 0.0);
  EXPECT_EQ(c.points[2].specificity, 1.0);
}

TEST(RocSweep, MatchesTallyAtEveryThreshold) {
  Rng rng(3);
  const auto cases = test::random_cases(rng, 300, false, true);
  const auto grid = uniform_grid(21);
  for (Weighting wt : {Weighting::weighted, Weighting::unweighted}) {
    const RocCurve c = roc_sweep(cases, grid, wt);
    for (const RocPoint& p : c.points) {
      const ConfusionTally t = tally_confusion(cases, p.threshold);
      EXPECT_NEAR(p.sensitivity, sensitivity(t, wt).value, 1e-12);
      EXPECT_NEAR(p.specificity, specificity(t, wt).value, 1e-12);
    }
  }
}

TEST(RocSweep, RejectsBadGridOrOneClass) {
  const std::vector<ScoredCase> cases{{1, 0.9, 1}, {0, 0.1, 1}};
  EXPECT_THROW(roc_sweep(cases, std::vector<double>{0.1, 1.0}, Weighting::weighted), DataError);
  EXPECT_THROW(roc_sweep(cases, std::vector<double>{0.0, 0.5, 0.5, 1.0}, Weighting::weighted), DataError);
  const std::vector<ScoredCase> one{{1, 0.9, 1}, {1, 0.1, 1}};
  EXPECT_THROW(roc_sweep(one, uniform_grid(), Weighting::weighted), UndefinedMetricError);
}

TEST(Auroc, PerfectSeparation) {
  const std::vector<ScoredCase> cases{{1, 0.9, 2}, {1, 0.8, 1}, {0, 0.3, 5}, {0, 0.1, 1}};
  EXPECT_DOUBLE_EQ(auroc(cases, GridSpec{}, Weighting::weighted), 1.0);
  EXPECT_DOUBLE_EQ(auroc(cases, GridSpec{GridSpec::Mode::exact}, Weighting::unweighted), 1.0);
}

TEST(Auroc, FourRecordHandCase) {
  // Pairs (pos, neg): (0.9,0.6) yes, (0.9,0.1) yes, (0.4,0.6) no, (0.4,0.1) yes.
  const std::vector<ScoredCase> cases{{1, 0.9, 1}, {1, 0.4, 1}, {0, 0.6, 1}, {0, 0.1, 1}};
  EXPECT_DOUBLE_EQ(auroc(cases, GridSpec{GridSpec::Mode::exact}, Weighting::unweighted), 0.75);
  EXPECT_DOUBLE_EQ(auroc(cases, GridSpec{}, Weighting::unweighted), 0.75);
}

TEST(Auroc, IdenticalScoresGiveOneHalf) {
  std::vector<ScoredCase> cases;
  for (int i = 0; i < 40; ++i) cases.push_back({i % 3 == 0, 0.37, 1.0 + i});
  EXPECT_DOUBLE_EQ(auroc(cases, GridSpec{}, Weighting::weighted), 0.5);
  EXPECT_DOUBLE_EQ(auroc(cases, GridSpec{GridSpec::Mode::exact}, Weighting::weighted), 0.5);
}

TEST(Auroc, ExactGridMatchesPairwiseOracle) {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto cases = test::random_cases(rng, 120, false, rep % 2 == 0);
    EXPECT_NEAR(auroc(cases, GridSpec{GridSpec::Mode::exact}, Weighting::weighted),
                test::pairwise_auc(cases, true), 1e-12);
    EXPECT_NEAR(auroc(cases, GridSpec{GridSpec::Mode::exact}, Weighting::unweighted),
                test::pairwise_auc(cases, false), 1e-12);
  }
}

TEST(Auroc, UniformGridExactOnGridScores) {
  // Scores on the 0.1 lattice lie on the 101-point grid, so every
  // operating point is visited.
  Rng rng(12);
  const auto cases = test::random_cases(rng, 200, false, true);
  EXPECT_NEAR(auroc(cases, GridSpec{}, Weighting::weighted), test::pairwise_auc(cases), 1e-12);
}

TEST(Auroc, InvariantUnderMonotoneTransformOnExactGrid) {
  Rng rng(13);
  auto cases = test::random_cases(rng, 150);
  const double before = auroc(cases, GridSpec{GridSpec::Mode::exact}, Weighting::weighted);
  for (auto& c : cases) c.score = std::pow(c.score, 3.0);
  EXPECT_NEAR(auroc(cases, GridSpec{GridSpec::Mode::exact}, Weighting::weighted), before, 1e-12);
}

TEST(Auroc, GridRefinementMovesTowardExact) {
  Rng rng(14);
  const auto cases = test::random_cases(rng, 500);
  const double exact = test::pairwise_auc(cases);
  const double coarse = auroc(cases, GridSpec{GridSpec::Mode::uniform, 11}, Weighting::weighted);
  const double fine = auroc(cases, GridSpec{GridSpec::Mode::uniform, 1001}, Weighting::weighted);
  EXPECT_LE(std::abs(fine - exact), std::abs(coarse - exact) + 1e-12);
  EXPECT_NEAR(fine, exact, 0.005);
}

TEST(Auroc, ConstantWeightsMatchUnweighted) {
  Rng rng(15);
  const auto cases = test::random_cases(rng, 250, true);
  EXPECT_NEAR(auroc(cases, GridSpec{}, Weighting::weighted), auroc(cases, GridSpec{}, Weighting::unweighted),
              1e-12);
}

TEST(Auroc, WithinUnitInterval) {
  Rng rng(16);
  for (int rep = 0; rep < 30; ++rep) {
    auto cases = test::random_cases(rng, 50);
    for (auto& c : cases) c.score = 1.0 - c.score;  // worse than chance
    const double a = auroc(cases, GridSpec{}, Weighting::weighted);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
}
