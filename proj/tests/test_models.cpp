#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace prescreen;
using namespace prescreen::models;

namespace {

double auc_of(const std::vector<double>& s, const std::vector<int>& y) { return stats::auc(s, y); }

// Fast settings for the two network kinds; the rest keep defaults.
Hyperparams quick(ModelKind kind) {
  if (kind == ModelKind::DeepLearning || kind == ModelKind::NeuralNetwork) return {{"epochs", 40}};
  return {};
}

FeatureMatrix xor_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> a(n), b(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.uniform(-1, 1);
    b[i] = rng.uniform(-1, 1);
    y[i] = (a[i] > 0) != (b[i] > 0) ? 1 : 0;
  }
  return testsupport::make_matrix({"a", "b"}, {a, b}, y);
}

}  // namespace

TEST(GbtSplitGain, ClosedForm) {
  EXPECT_NEAR(gbt_split_gain(2, 1, -2, 1, 1, 0), 2.0, 1e-12);
  EXPECT_NEAR(gbt_split_gain(0, 3, 0, 5, 1, 0.7), -0.7, 1e-12);
  // Identical halves: 0.5 * (2 * 2.25 / 3 - 9 / 5).
  EXPECT_NEAR(gbt_split_gain(1.5, 2, 1.5, 2, 1, 0), -0.15, 1e-12);
}

TEST(BoostedTrees, OneStumpReproducesLeafWeights) {
  // Binary separating feature; one depth-1 tree, learning rate 1.
  const std::vector<double> x{0, 0, 0, 1, 1, 1, 1};
  const std::vector<int> y{0, 0, 0, 1, 1, 1, 1};
  const auto m = testsupport::make_matrix({"f"}, {x}, y);
  const auto model = BoostedTrees::fit(m.values(), m.labels(), {1, 1, 1.0, 1.0, 0.0, 0.0});
  // At margin 0 every p = 0.5: g = 0.5 - y, h = 0.25.
  const double left = gbt_leaf_weight(3 * 0.5, 3 * 0.25, 1.0);
  const double right = gbt_leaf_weight(4 * -0.5, 4 * 0.25, 1.0);
  const auto margin = model.margin(m.values());
  EXPECT_NEAR(margin[0], left, 1e-12);
  EXPECT_NEAR(margin[6], right, 1e-12);
  EXPECT_NEAR(left, -1.5 / 1.75, 1e-15);
  EXPECT_NEAR(model.importance()[0], gbt_split_gain(1.5, 0.75, -2.0, 1.0, 1.0, 0.0), 1e-12);
}

TEST(Classifiers, SeparableToyRanksPerfectly) {
  const auto m = testsupport::blobs(60, 2, 0, 6.0, 21);
  for (auto kind : kAllKinds) {
    const auto model = train_classifier(kind, m, 3, quick(kind));
    const double a = auc_of(model.predict_scores(m), m.labels());
    if (kind == ModelKind::RandomForest || kind == ModelKind::XgboostLike) EXPECT_GE(a, 0.99) << to_string(kind);
    else EXPECT_EQ(a, 1.0) << to_string(kind);
  }
}

TEST(Classifiers, DeterministicScores) {
  const auto m = testsupport::blobs(50, 2, 2, 1.0, 22);
  for (auto kind : kAllKinds) {
    const auto a = train_classifier(kind, m, 9, quick(kind)).predict_scores(m);
    const auto b = train_classifier(kind, m, 9, quick(kind)).predict_scores(m);
    EXPECT_EQ(a, b) << to_string(kind);
    for (double s : a) EXPECT_TRUE(std::isfinite(s));
  }
}

TEST(Classifiers, ProbabilisticKindsStayInUnitInterval) {
  const auto m = testsupport::blobs(50, 2, 2, 1.0, 23);
  for (auto kind : kAllKinds) {
    if (kind == ModelKind::Svm) continue;
    for (double s : train_classifier(kind, m, 1, quick(kind)).predict_scores(m)) {
      EXPECT_GE(s, 0.0) << to_string(kind);
      EXPECT_LE(s, 1.0) << to_string(kind);
    }
  }
}

TEST(Classifiers, FeatureOrderEnforced) {
  const auto m = testsupport::blobs(30, 2, 0, 2.0, 24);
  const auto model = train_classifier(ModelKind::LogisticRegression, m, 0);
  const auto swapped = m.select_columns({m.names()[1], m.names()[0]});
  try {
    model.predict_scores(swapped);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FeatureMismatch);
  }
}

TEST(Classifiers, SingleClassAndBadHyperparams) {
  auto m = testsupport::make_matrix({"a"}, {{1, 2, 3}}, {1, 1, 1});
  EXPECT_THROW(train_classifier(ModelKind::NaiveBayes, m, 0), Error);
  const auto ok = testsupport::blobs(20, 1, 0, 1.0, 1);
  try {
    train_classifier(ModelKind::Svm, ok, 0, {{"kernel", 2.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidHyperparam);
  }
  EXPECT_THROW(train_classifier(ModelKind::RandomForest, ok, 0, {{"trees", 0.0}}), Error);
  EXPECT_THROW(train_classifier(ModelKind::DeepLearning, ok, 0, {{"beta1", 1.0}}), Error);
}

TEST(Classifiers, XorNeedsTrees) {
  double rf = 0.0, xgb = 0.0, logit = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    const auto train = xor_data(200, 1000 + static_cast<std::uint64_t>(s));
    const auto test = xor_data(200, 5000 + static_cast<std::uint64_t>(s));
    rf += auc_of(train_classifier(ModelKind::RandomForest, train, s).predict_scores(test), test.labels());
    xgb += auc_of(train_classifier(ModelKind::XgboostLike, train, s).predict_scores(test), test.labels());
    logit += auc_of(train_classifier(ModelKind::LogisticRegression, train, s).predict_scores(test), test.labels());
  }
  EXPECT_GE(rf / seeds, 0.9);
  EXPECT_GE(xgb / seeds, 0.9);
  EXPECT_NEAR(logit / seeds, 0.5, 0.1);
}

TEST(NaiveBayes, MidpointOfSymmetricGaussiansIsHalf) {
  // Mirror-image classes around 0 with equal counts.
  std::vector<double> a, b;
  std::vector<int> y;
  Rng rng(30);
  for (int i = 0; i < 50; ++i) {
    const double u = rng.normal(2.0, 1.0), v = rng.normal(-1.0, 0.5);
    a.push_back(u);
    b.push_back(v);
    y.push_back(1);
    a.push_back(-u);
    b.push_back(-v);
    y.push_back(0);
  }
  const auto m = testsupport::make_matrix({"a", "b"}, {a, b}, y);
  const auto model = train_classifier(ModelKind::NaiveBayes, m, 0);
  const auto mid = testsupport::make_matrix({"a", "b"}, {{0.0, 0.0}, {0.0, 0.0}}, {0, 1});
  for (double s : model.predict_scores(mid)) EXPECT_NEAR(s, 0.5, 1e-9);
}

TEST(Logistic, ConvergesToStationaryPoint) {
  const auto m = testsupport::blobs(80, 3, 1, 0.8, 31);
  const LogisticParams params{1e-4, 1e-8, 200};
  const Standardizer sc = Standardizer::fit(m.values());
  const Eigen::MatrixXd x = sc.apply(m.values());
  const auto model = fit_logistic(x, m.labels(), params);
  // Independent gradient of mean log loss + (l2 / 2) |w|^2, intercept unpenalized.
  Eigen::VectorXd gw = Eigen::VectorXd::Zero(x.cols());
  double gb = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-(x.row(i).dot(model.weights) + model.intercept)));
    const double r = p - m.labels()[static_cast<std::size_t>(i)];
    gw += r * x.row(i).transpose() / static_cast<double>(x.rows());
    gb += r / static_cast<double>(x.rows());
  }
  gw += 1e-4 * model.weights;
  EXPECT_LE(gw.norm() + std::abs(gb), 1e-6);
}

TEST(Standardizer, TrainStatisticsOnly) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 5, 2, 5, 3, 5, 4, 5;
  const auto s = Standardizer::fit(x);
  const Eigen::MatrixXd z = s.apply(x);
  EXPECT_NEAR(z.col(0).mean(), 0.0, 1e-15);
  EXPECT_NEAR((z.col(0).array() - z.col(0).mean()).square().sum() / 3.0, 1.0, 1e-12);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ(z(i, 1), 0.0);
}

TEST(Svm, MedianHeuristicGamma) {
  Eigen::MatrixXd x(3, 1);
  x << 0, 1, 3;
  // Pairwise distances 1, 2, 3 -> median 2.
  EXPECT_NEAR(median_heuristic_gamma(x), 1.0 / 8.0, 1e-15);
}

TEST(Svm, KktConditionsHoldAtSolution) {
  const auto m = testsupport::blobs(40, 2, 0, 1.5, 40);
  const auto svm = RbfSvm::fit(m.values(), m.labels(), {1.0, 0.5, 1e-6, 10'000'000});
  const auto f = svm.decision(m.values());
  // Margin violations only for bounded vectors: y f >= 1 - tol for points
  // that are not support vectors.
  std::size_t violations = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double yi = m.labels()[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
    if (yi * f[i] < 1.0 - 1e-3) ++violations;
  }
  EXPECT_LE(violations, svm.support_count());
  EXPECT_GT(svm.support_count(), 0u);
}

TEST(ModelKindNames, RoundTrip) {
  for (auto kind : kAllKinds) EXPECT_EQ(parse_model_kind(to_string(kind)), kind);
  EXPECT_FALSE(parse_model_kind("xgboost").has_value());
}
