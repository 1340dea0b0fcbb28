#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "sveval/rng.hpp"

using namespace sveval;

TEST(Rng, SameSeedSameSequence) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Rng, StreamsDifferByStageAndReplicate) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t r = 0; r < 20; ++r)
    for (Stage s : {Stage::population, Stage::sampling, Stage::splitting, Stage::upsampling, Stage::forest})
      firsts.insert(Rng::stream(7, r, s)());
  EXPECT_EQ(firsts.size(), 100u);
}

TEST(Rng, DeriveSeedIsOrderSensitive) {
  EXPECT_NE(derive_seed({1, 2}), derive_seed({2, 1}));
  EXPECT_NE(derive_seed({1}), derive_seed({1, 0}));
  EXPECT_EQ(derive_seed({5, 6, 7}), derive_seed({5, 6, 7}));
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Rng, IndexIsUniform) {
  Rng rng(3);
  const std::uint64_t k = 7;
  const int n = 70000;
  std::vector<int> counts(k, 0);
  for (int i = 0; i < n; ++i) {
    const auto v = rng.index(k);
    ASSERT_LT(v, k);
    ++counts[v];
  }
  const double expected = static_cast<double>(n) / k;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 22.5);  // 0.999 quantile, 6 df
}

TEST(Rng, BernoulliRate) {
  Rng rng(9);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += rng.bernoulli(0.3);
  EXPECT_NEAR(hits / static_cast<double>(n), 0.3, 4.0 * std::sqrt(0.21 / n));
  EXPECT_FALSE(Rng(1).bernoulli(0.0));
  EXPECT_TRUE(Rng(1).bernoulli(1.0));
}
