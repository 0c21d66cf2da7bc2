#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "prescreen/error.hpp"
#include "prescreen/rng.hpp"

namespace prescreen::models {

inline double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

struct LinearModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;

  Eigen::VectorXd margin(const Eigen::MatrixXd& x) const {
    return (x * weights).array() + intercept;
  }
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const {
    return margin(x).unaryExpr([](double m) { return logistic(m); });
  }
};

struct LogisticParams {
  double l2 = 1e-4;
  double tolerance = 1e-8;
  std::size_t max_iterations = 200;
};

/// Minimizes mean log-loss + (l2/2)|w|^2 (intercept unpenalized) with damped
/// Newton steps until the gradient's max-norm drops below `tolerance`.
inline LinearModel fit_logistic(const Eigen::MatrixXd& x, std::span<const int> y, const LogisticParams& params) {
  const auto n = x.rows(), p = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd xa(n, p + 1);
  xa.leftCols(p) = x;
  xa.col(p).setOnes();
  Eigen::VectorXd yv(n);
  for (Eigen::Index i = 0; i < n; ++i) yv[i] = y[static_cast<std::size_t>(i)];
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p + 1, params.l2);
  penalty[p] = 0.0;

  auto objective = [&](const Eigen::VectorXd& w) {
    const Eigen::VectorXd z = xa * w;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) loss += softplus(z[i]) - yv[i] * z[i];
    return loss * inv_n + 0.5 * (penalty.array() * w.array().square()).sum();
  };

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p + 1);
  double f = objective(w);
  for (std::size_t iter = 0; iter < params.max_iterations; ++iter) {
    const Eigen::VectorXd z = xa * w;
    Eigen::VectorXd prob(n), weight(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob[i] = logistic(z[i]);
      weight[i] = prob[i] * (1.0 - prob[i]);
    }
    const Eigen::VectorXd grad = xa.transpose() * (prob - yv) * inv_n + penalty.cwiseProduct(w);
    if (grad.cwiseAbs().maxCoeff() < params.tolerance) break;
    Eigen::MatrixXd hess = xa.transpose() * weight.asDiagonal() * xa * inv_n;
    hess.diagonal() += penalty;
    hess.diagonal().array() += 1e-12;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    double t = 1.0;
    Eigen::VectorXd candidate = w - step;
    double fc = objective(candidate);
    while (fc > f - 1e-4 * t * grad.dot(step) && t > 1e-10) {
      t *= 0.5;
      candidate = w - t * step;
      fc = objective(candidate);
    }
    if (!std::isfinite(fc)) throw Error(ErrorKind::NonFiniteLoss, "logistic regression objective diverged");
    if (fc >= f) break;  // no further progress in floating point
    w = candidate;
    f = fc;
  }
  return {w.head(p), w[p]};
}

struct SgdParams {
  double learning_rate = 0.01;
  std::size_t epochs = 50;
  double alpha = 1e-4;  // L2 strength
};

/// Linear model with log loss, one update per sample in a freshly shuffled
/// order each epoch, constant learning rate.
inline LinearModel fit_sgd(const Eigen::MatrixXd& x, std::span<const int> y, const SgdParams& params, Rng& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  LinearModel m{Eigen::VectorXd::Zero(x.cols()), 0.0};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (auto i : order) {
      const auto row = x.row(static_cast<Eigen::Index>(i));
      const double p = logistic(row.dot(m.weights) + m.intercept);
      const double g = p - y[i];
      m.weights -= params.learning_rate * (g * row.transpose() + params.alpha * m.weights);
      m.intercept -= params.learning_rate * g;
    }
    if (!m.weights.allFinite() || !std::isfinite(m.intercept))
      throw Error(ErrorKind::NonFiniteLoss, "SGD weights diverged at epoch " + std::to_string(epoch));
  }
  return m;
}

}  // namespace prescreen::models
