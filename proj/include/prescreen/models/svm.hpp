#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "prescreen/error.hpp"

namespace prescreen::models {

struct SvmParams {
  double c = 1.0;
  double gamma = 0.0;  // <= 0 selects the median-distance heuristic
  double tolerance = 1e-3;
  std::size_t max_iterations = 10'000'000;
};

/// gamma = 1 / (2 d^2) with d the median pairwise Euclidean distance.
inline double median_heuristic_gamma(const Eigen::MatrixXd& x) {
  std::vector<double> d;
  const auto n = x.rows();
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) d.push_back((x.row(i) - x.row(j)).norm());
  if (d.empty()) return 1.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double med = *mid;
  if (d.size() % 2 == 0) med = 0.5 * (med + *std::max_element(d.begin(), mid));
  return med > 0.0 ? 1.0 / (2.0 * med * med) : 1.0;
}

/// Soft-margin C-SVC with an RBF kernel, solved by SMO using second-order
/// working-set selection. Scores are raw decision values.
class RbfSvm {
 public:
  static RbfSvm fit(const Eigen::MatrixXd& x, std::span<const int> labels, const SvmParams& params) {
    const auto n = static_cast<std::size_t>(x.rows());
    RbfSvm model;
    model.gamma_ = params.gamma > 0.0 ? params.gamma : median_heuristic_gamma(x);

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == 1 ? 1.0 : -1.0;
    Eigen::MatrixXd k(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < k.rows(); ++i)
      for (Eigen::Index j = i; j < k.cols(); ++j)
        k(i, j) = k(j, i) = std::exp(-model.gamma_ * (x.row(i) - x.row(j)).squaredNorm());

    const double c = params.c;
    constexpr double tau = 1e-12;
    std::vector<double> alpha(n, 0.0), g(n, -1.0);
    auto q = [&](std::size_t i, std::size_t j) {
      return y[i] * y[j] * k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    auto at_upper = [&](std::size_t t) { return alpha[t] >= c; };
    auto at_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    for (std::size_t iter = 0; iter < params.max_iterations; ++iter) {
      // Working set: i maximizes -y G over I_up, j minimizes the second-order
      // objective decrease over I_low.
      double g_max = -std::numeric_limits<double>::infinity();
      std::ptrdiff_t i_sel = -1;
      for (std::size_t t = 0; t < n; ++t) {
        if (y[t] > 0 ? !at_upper(t) : !at_lower(t)) {
          if (-y[t] * g[t] >= g_max) {
            g_max = -y[t] * g[t];
            i_sel = static_cast<std::ptrdiff_t>(t);
          }
        }
      }
      if (i_sel < 0) break;
      const auto i = static_cast<std::size_t>(i_sel);
      double g_max2 = -std::numeric_limits<double>::infinity();
      double obj_min = std::numeric_limits<double>::infinity();
      std::ptrdiff_t j_sel = -1;
      for (std::size_t t = 0; t < n; ++t) {
        if (y[t] > 0 ? !at_lower(t) : !at_upper(t)) {
          const double yg = y[t] * g[t];
          if (yg >= g_max2) g_max2 = yg;
          const double diff = g_max + yg;
          if (diff > 0.0) {
            double quad = k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) +
                          k(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t)) -
                          2.0 * y[i] * y[t] * q(i, t);
            if (quad <= 0.0) quad = tau;
            const double obj = -(diff * diff) / quad;
            if (obj <= obj_min) {
              obj_min = obj;
              j_sel = static_cast<std::ptrdiff_t>(t);
            }
          }
        }
      }
      if (g_max + g_max2 < params.tolerance || j_sel < 0) break;
      const auto j = static_cast<std::size_t>(j_sel);

      const double old_i = alpha[i], old_j = alpha[j];
      const double kii = k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
      const double kjj = k(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
      if (y[i] != y[j]) {
        double quad = kii + kjj + 2.0 * q(i, j);
        if (quad <= 0.0) quad = tau;
        const double delta = (-g[i] - g[j]) / quad;
        const double diff = alpha[i] - alpha[j];
        alpha[i] += delta;
        alpha[j] += delta;
        if (diff > 0.0) {
          if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
        } else {
          if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
        }
        if (diff > 0.0) {
          if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
        } else {
          if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
        }
      } else {
        double quad = kii + kjj - 2.0 * q(i, j);
        if (quad <= 0.0) quad = tau;
        const double delta = (g[i] - g[j]) / quad;
        const double sum = alpha[i] + alpha[j];
        alpha[i] -= delta;
        alpha[j] += delta;
        if (sum > c) {
          if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
        } else {
          if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
        }
        if (sum > c) {
          if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
        } else {
          if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
        }
      }
      const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
      for (std::size_t t = 0; t < n; ++t) g[t] += q(i, t) * di + q(j, t) * dj;
    }

    // rho from free vectors, else the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const double yg = y[t] * g[t];
      if (at_upper(t)) {
        if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (at_lower(t)) {
        if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    model.rho_ = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

    for (std::size_t t = 0; t < n; ++t) {
      if (alpha[t] > 0.0) {
        model.support_.push_back(x.row(static_cast<Eigen::Index>(t)));
        model.coef_.push_back(alpha[t] * y[t]);
      }
    }
    return model;
  }

  Eigen::VectorXd decision(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      double s = 0.0;
      for (std::size_t t = 0; t < support_.size(); ++t)
        s += coef_[t] * std::exp(-gamma_ * (support_[t] - x.row(r)).squaredNorm());
      out[r] = s - rho_;
    }
    return out;
  }

  double gamma() const noexcept { return gamma_; }
  std::size_t support_count() const noexcept { return support_.size(); }

 private:
  double gamma_ = 1.0;
  double rho_ = 0.0;
  std::vector<Eigen::RowVectorXd> support_;
  std::vector<double> coef_;
};

}  // namespace prescreen::models
