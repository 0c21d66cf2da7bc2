#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "prescreen/models/tree.hpp"

namespace prescreen::models {

/// Second-order split gain:
///   1/2 [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - (G_L+G_R)^2/(H_L+H_R+lambda)] - gamma
inline double gbt_split_gain(double g_left, double h_left, double g_right, double h_right, double lambda,
                             double gamma) {
  const double g = g_left + g_right, h = h_left + h_right;
  return 0.5 * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda) -
                g * g / (h + lambda)) -
         gamma;
}

inline double gbt_leaf_weight(double g, double h, double lambda) { return -g / (h + lambda); }

struct BoostParams {
  std::size_t trees = 100;
  std::size_t max_depth = 3;
  double learning_rate = 0.1;
  double lambda = 1.0;
  double gamma = 0.0;
  double min_child_weight = 1.0;
};

/// Logistic-loss gradient boosting with exact greedy splits. Leaf values
/// already include the learning rate; the base margin is 0 (probability 0.5).
class BoostedTrees {
 public:
  static BoostedTrees fit(const Eigen::MatrixXd& x, std::span<const int> y, const BoostParams& params) {
    BoostedTrees model;
    model.params_ = params;
    model.importance_.assign(static_cast<std::size_t>(x.cols()), 0.0);
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<double> margin(n, 0.0), grad(n), hess(n);

    // Presorted row order per feature; node subsets are filtered from it.
    std::vector<std::vector<std::size_t>> order(static_cast<std::size_t>(x.cols()));
    for (std::size_t f = 0; f < order.size(); ++f) {
      order[f].resize(n);
      std::iota(order[f].begin(), order[f].end(), std::size_t{0});
      const auto col = static_cast<Eigen::Index>(f);
      std::stable_sort(order[f].begin(), order[f].end(), [&](std::size_t a, std::size_t b) {
        return x(static_cast<Eigen::Index>(a), col) < x(static_cast<Eigen::Index>(b), col);
      });
    }

    std::vector<int> node_of(n);
    for (std::size_t t = 0; t < params.trees; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        const double p = 1.0 / (1.0 + std::exp(-margin[i]));
        grad[i] = p - y[i];
        hess[i] = p * (1.0 - p);
      }
      Tree tree = model.grow(x, grad, hess, order, node_of);
      for (std::size_t i = 0; i < n; ++i) margin[i] += tree.predict(x.row(static_cast<Eigen::Index>(i)));
      model.trees_.push_back(std::move(tree));
    }
    return model;
  }

  Eigen::VectorXd margin(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const Eigen::RowVectorXd row = x.row(r);
      for (const auto& t : trees_) out[r] += t.predict(row);
    }
    return out;
  }

  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const {
    return margin(x).unaryExpr([](double m) { return 1.0 / (1.0 + std::exp(-m)); });
  }

  /// Total split gain per feature, summed over all trees.
  const std::vector<double>& importance() const noexcept { return importance_; }
  const std::vector<Tree>& trees() const noexcept { return trees_; }

 private:
  struct Candidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
  };

  Tree grow(const Eigen::MatrixXd& x, const std::vector<double>& grad, const std::vector<double>& hess,
            const std::vector<std::vector<std::size_t>>& order, std::vector<int>& node_of) {
    Tree tree;
    std::fill(node_of.begin(), node_of.end(), 0);
    tree.nodes.emplace_back();
    std::vector<int> frontier = {0};
    for (std::size_t depth = 0; depth <= params_.max_depth && !frontier.empty(); ++depth) {
      // Per-node gradient sums for this level.
      const std::size_t count = tree.nodes.size();
      std::vector<double> g_sum(count, 0.0), h_sum(count, 0.0);
      for (std::size_t i = 0; i < grad.size(); ++i) {
        g_sum[static_cast<std::size_t>(node_of[i])] += grad[i];
        h_sum[static_cast<std::size_t>(node_of[i])] += hess[i];
      }
      std::vector<Candidate> best(count);
      if (depth < params_.max_depth) {
        for (std::size_t f = 0; f < order.size(); ++f) scan_feature(x, f, grad, hess, order[f], node_of, g_sum, h_sum, best);
      }
      std::vector<int> next;
      for (int id : frontier) {
        const auto u = static_cast<std::size_t>(id);
        if (best[u].feature < 0) {
          tree.nodes[u].value = params_.learning_rate * gbt_leaf_weight(g_sum[u], h_sum[u], params_.lambda);
          continue;
        }
        importance_[static_cast<std::size_t>(best[u].feature)] += best[u].gain;
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        auto& node = tree.nodes[u];
        node.feature = best[u].feature;
        node.threshold = best[u].threshold;
        node.left = left;
        node.right = left + 1;
        next.push_back(left);
        next.push_back(left + 1);
      }
      for (std::size_t i = 0; i < node_of.size(); ++i) {
        const auto& node = tree.nodes[static_cast<std::size_t>(node_of[i])];
        if (node.feature >= 0)
          node_of[i] = x(static_cast<Eigen::Index>(i), node.feature) < node.threshold ? node.left : node.right;
      }
      frontier = std::move(next);
    }
    return tree;
  }

  void scan_feature(const Eigen::MatrixXd& x, std::size_t f, const std::vector<double>& grad,
                    const std::vector<double>& hess, const std::vector<std::size_t>& sorted,
                    const std::vector<int>& node_of, const std::vector<double>& g_sum,
                    const std::vector<double>& h_sum, std::vector<Candidate>& best) const {
    const std::size_t count = g_sum.size();
    std::vector<double> g_left(count, 0.0), h_left(count, 0.0);
    std::vector<double> last_value(count, 0.0);
    std::vector<char> seen(count, 0);
    const auto col = static_cast<Eigen::Index>(f);
    // Walk rows in value order; a threshold between the previous and current
    // value of a node is evaluated before the current row joins the left side.
    for (std::size_t i : sorted) {
      const auto u = static_cast<std::size_t>(node_of[i]);
      const double v = x(static_cast<Eigen::Index>(i), col);
      if (seen[u] && v != last_value[u]) {
        const double gr = g_sum[u] - g_left[u], hr = h_sum[u] - h_left[u];
        if (h_left[u] >= params_.min_child_weight && hr >= params_.min_child_weight) {
          const double gain = gbt_split_gain(g_left[u], h_left[u], gr, hr, params_.lambda, params_.gamma);
          if (gain > 0.0 && gain > best[u].gain) best[u] = {gain, static_cast<int>(f), 0.5 * (last_value[u] + v)};
        }
      }
      g_left[u] += grad[i];
      h_left[u] += hess[i];
      last_value[u] = v;
      seen[u] = 1;
    }
  }

  BoostParams params_;
  std::vector<Tree> trees_;
  std::vector<double> importance_;
};

}  // namespace prescreen::models
