#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace prescreen;
using testsupport::auc_oracle;

namespace {

// Independent plug-in entropy in bits over integer codes.
double entropy_bits(const std::vector<std::size_t>& codes) {
  std::map<std::size_t, double> counts;
  for (auto c : codes) counts[c] += 1.0;
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    const double p = c / static_cast<double>(codes.size());
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

TEST(Pearson, ClosedFormCases) {
  const std::vector<double> x{1, 2, 3}, y{2, 4, 7};
  // sxy = 5, sxx = 2, syy = 38/3 -> r = 5 / sqrt(76/3)
  EXPECT_NEAR(stats::pearson(x, y), 5.0 / std::sqrt(76.0 / 3.0), 1e-14);
  EXPECT_NEAR(stats::pearson(x, y), 0.99340, 5e-6);
  EXPECT_DOUBLE_EQ(stats::pearson(x, x), 1.0);
  const std::vector<double> neg{-1, -2, -3};
  EXPECT_DOUBLE_EQ(stats::pearson(x, neg), -1.0);
}

TEST(Pearson, Errors) {
  const std::vector<double> c{1, 1, 1}, x{1, 2, 3}, shorter{1, 2};
  EXPECT_THROW(stats::pearson(c, x), Error);
  EXPECT_THROW(stats::pearson(x, shorter), Error);
}

TEST(Pearson, SymmetricBoundedAffineInvariant) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(50);
    std::vector<double> x(n), y(n), ax(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.normal();
      y[i] = 0.3 * x[i] + rng.normal();
      ax[i] = 4.5 * x[i] + 17.0;
    }
    if (n == 2 && x[0] == x[1]) continue;
    const double r = stats::pearson(x, y);
    EXPECT_NEAR(r, stats::pearson(y, x), 1e-14);
    EXPECT_LE(std::abs(r), 1.0 + 1e-12);
    EXPECT_NEAR(r, stats::pearson(ax, y), 1e-12);
  }
}

TEST(MutualInformation, MedianSplitGivesOneBit) {
  std::vector<double> x;
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) {
    x.push_back(i * 0.37);
    y.push_back(i >= 50 ? 1 : 0);
  }
  EXPECT_NEAR(stats::mutual_information(x, y, 2), 1.0, 1e-12);
}

TEST(MutualInformation, IndependentPatternIsZero) {
  // Every bin holds the same class mix.
  std::vector<double> x;
  std::vector<int> y;
  for (int b = 0; b < 5; ++b)
    for (int r = 0; r < 4; ++r) {
      x.push_back(b);
      y.push_back(r % 2);
    }
  EXPECT_NEAR(stats::mutual_information(x, y, 10), 0.0, 1e-15);
}

TEST(MutualInformation, BoundsAndPermutationInvariance) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10 + rng.below(100);
    std::vector<double> x(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.uniform() < 0.5 ? 1 : 0;
      x[i] = std::round(rng.normal(y[i] * 0.8, 1.0) * 4.0) / 4.0;  // coarse grid forces ties
    }
    y[0] = 0;
    y[1] = 1;
    const double mi = stats::mutual_information(x, y, 10);
    EXPECT_GE(mi, 0.0);
    const auto bins = stats::equal_frequency_bins(x, 10);
    std::vector<std::size_t> ycodes(y.begin(), y.end());
    EXPECT_LE(mi, std::min(entropy_bits(bins), entropy_bits(ycodes)) + 1e-12);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    std::vector<double> px(n);
    std::vector<int> py(n);
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = x[perm[i]];
      py[i] = y[perm[i]];
    }
    EXPECT_NEAR(stats::mutual_information(px, py, 10), mi, 1e-12);
  }
}

TEST(MutualInformation, BinaryFeatureUsesTwoLevels) {
  const std::vector<double> x{0, 0, 1, 1, 0, 1};
  const auto bins = stats::equal_frequency_bins(x, 10);
  EXPECT_EQ(*std::max_element(bins.begin(), bins.end()), 1u);
}

TEST(MutualInformation, SingleClassRejected) {
  const std::vector<double> x{1, 2, 3};
  const std::vector<int> y{1, 1, 1};
  EXPECT_THROW(stats::mutual_information(x, y, 2), Error);
}

TEST(Auc, HandCases) {
  EXPECT_DOUBLE_EQ(stats::auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}), 0.75);
  EXPECT_DOUBLE_EQ(stats::auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(stats::auc(std::vector<double>{3, 3, 3, 3}, std::vector<int>{0, 1, 0, 1}), 0.5);
  EXPECT_THROW(stats::auc(std::vector<double>{1, 2}, std::vector<int>{1, 1}), Error);
}

TEST(Auc, MatchesPairOracleWithTies) {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(12));
      y[i] = rng.uniform() < 0.4 ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(stats::auc(s, y), auc_oracle(s, y), 1e-12);
  }
}

TEST(Auc, MonotoneTransformAndComplement) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng.below(80);
    std::vector<double> s(n), t(n), neg(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = rng.normal();
      t[i] = std::exp(3.0 * s[i]) + 2.0;
      neg[i] = -s[i];
      y[i] = i % 3 == 0 ? 1 : 0;
    }
    const double a = stats::auc(s, y);
    EXPECT_DOUBLE_EQ(a, stats::auc(t, y));
    EXPECT_NEAR(a + stats::auc(neg, y), 1.0, 1e-12);
  }
}

TEST(Summarize, CasesAndErrors) {
  const auto c = stats::summarize(std::vector<double>(10, 0.8));
  EXPECT_DOUBLE_EQ(c.mean, 0.8);
  EXPECT_NEAR(c.std, 0.0, 1e-15);  // mean carries rounding
  EXPECT_DOUBLE_EQ(c.p2_5, 0.8);
  EXPECT_DOUBLE_EQ(c.p97_5, 0.8);
  const auto two = stats::summarize({0.0, 1.0});
  EXPECT_DOUBLE_EQ(two.mean, 0.5);
  EXPECT_NEAR(two.std, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(two.p2_5, 0.025, 1e-15);
  EXPECT_NEAR(two.p97_5, 0.975, 1e-15);
  EXPECT_THROW(stats::summarize({0.5}), Error);
}

TEST(Summarize, PercentilesByLinearInterpolation) {
  // 11 points 0..10: position q*(n-1) = 10q.
  std::vector<double> v;
  for (int i = 10; i >= 0; --i) v.push_back(i);
  const auto s = stats::summarize(v);
  EXPECT_NEAR(s.p2_5, 0.25, 1e-12);
  EXPECT_NEAR(s.q1, 2.5, 1e-12);
  EXPECT_NEAR(s.median, 5.0, 1e-12);
  EXPECT_NEAR(s.p97_5, 9.75, 1e-12);
  EXPECT_EQ(s.samples, v);  // original order kept
}
