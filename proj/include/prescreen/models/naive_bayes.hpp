#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <span>

namespace prescreen::models {

/// Per-class independent Gaussians (maximum-likelihood variances, floored).
struct GaussianNaiveBayes {
  Eigen::RowVectorXd mean[2];
  Eigen::RowVectorXd var[2];
  double log_prior[2] = {0.0, 0.0};

  static GaussianNaiveBayes fit(const Eigen::MatrixXd& x, std::span<const int> y, double var_floor = 1e-9) {
    GaussianNaiveBayes nb;
    for (int c = 0; c < 2; ++c) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(x.cols());
      double count = 0.0;
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        if (y[static_cast<std::size_t>(i)] == c) {
          sum += x.row(i);
          count += 1.0;
        }
      nb.mean[c] = sum / count;
      Eigen::RowVectorXd ss = Eigen::RowVectorXd::Zero(x.cols());
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        if (y[static_cast<std::size_t>(i)] == c) ss += (x.row(i) - nb.mean[c]).array().square().matrix();
      nb.var[c] = (ss / count).cwiseMax(var_floor);
      nb.log_prior[c] = std::log(count / static_cast<double>(x.rows()));
    }
    return nb;
  }

  /// Posterior probability of class 1.
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      double lj[2];
      for (int c = 0; c < 2; ++c) {
        const auto d = (x.row(r) - mean[c]).array();
        lj[c] = log_prior[c] - 0.5 * ((d.square() / var[c].array()).sum() +
                                      (2.0 * std::numbers::pi * var[c].array()).log().sum());
      }
      const double diff = lj[0] - lj[1];
      out[r] = diff > 0 ? std::exp(-diff) / (1.0 + std::exp(-diff)) : 1.0 / (1.0 + std::exp(diff));
    }
    return out;
  }
};

}  // namespace prescreen::models
