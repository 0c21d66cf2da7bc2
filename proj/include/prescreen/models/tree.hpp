#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "prescreen/rng.hpp"

namespace prescreen::models {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

/// Binary tree stored as a node array; rows with x[feature] < threshold go left.
struct Tree {
  std::vector<TreeNode> nodes;

  template <class Row>
  double predict(const Row& x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = x[n.feature] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }

  std::size_t depth() const { return depth_from(0); }

 private:
  std::size_t depth_from(int i) const {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    if (n.feature < 0) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }
};

struct CartParams {
  std::size_t max_depth = 8;
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;  // 0 = all features
};

/// Gini-impurity classification tree; leaves hold the positive fraction.
/// `samples` may repeat rows (bootstrap). At each node `max_features` features
/// are sampled without replacement and scanned in ascending index order; the
/// first strictly best split wins and thresholds sit at value midpoints.
class GiniTreeBuilder {
 public:
  GiniTreeBuilder(const Eigen::MatrixXd& x, std::span<const int> y, CartParams params, Rng& rng)
      : x_(x), y_(y), params_(params), rng_(rng) {}

  Tree build(std::vector<std::size_t> samples) {
    tree_ = Tree{};
    grow(samples, 0);
    return std::move(tree_);
  }

 private:
  static double gini(double pos, double total) {
    if (total <= 0.0) return 0.0;
    const double p = pos / total;
    return 2.0 * p * (1.0 - p);
  }

  int grow(std::vector<std::size_t>& samples, std::size_t depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double pos = 0.0;
    for (auto s : samples) pos += y_[s];
    const double total = static_cast<double>(samples.size());
    tree_.nodes[static_cast<std::size_t>(id)].value = total > 0 ? pos / total : 0.0;

    if (depth >= params_.max_depth || samples.size() < params_.min_samples_split || pos == 0.0 || pos == total)
      return id;

    const auto p = static_cast<std::size_t>(x_.cols());
    std::vector<std::size_t> features(p);
    std::iota(features.begin(), features.end(), std::size_t{0});
    const std::size_t k = params_.max_features == 0 ? p : std::min(p, params_.max_features);
    if (k < p) {
      // Partial Fisher-Yates, then restore index order for deterministic ties.
      for (std::size_t i = 0; i < k; ++i) std::swap(features[i], features[i + rng_.below(p - i)]);
      features.resize(k);
      std::sort(features.begin(), features.end());
    }

    const double parent = gini(pos, total);
    double best_gain = 0.0, best_threshold = 0.0;
    int best_feature = -1;
    std::vector<std::size_t> sorted = samples;
    for (auto f : features) {
      const auto col = static_cast<Eigen::Index>(f);
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return x_(static_cast<Eigen::Index>(a), col) < x_(static_cast<Eigen::Index>(b), col);
      });
      double left_pos = 0.0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        left_pos += y_[sorted[i]];
        const double v = x_(static_cast<Eigen::Index>(sorted[i]), col);
        const double next = x_(static_cast<Eigen::Index>(sorted[i + 1]), col);
        if (v == next) continue;
        const double nl = static_cast<double>(i + 1), nr = total - nl;
        const double child = (nl * gini(left_pos, nl) + nr * gini(pos - left_pos, nr)) / total;
        const double gain = parent - child;
        if (gain > best_gain + 1e-15) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (v + next);
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto s : samples)
      (x_(static_cast<Eigen::Index>(s), best_feature) < best_threshold ? left : right).push_back(s);
    samples.clear();
    samples.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const Eigen::MatrixXd& x_;
  std::span<const int> y_;
  CartParams params_;
  Rng& rng_;
  Tree tree_;
};

struct ForestParams {
  std::size_t trees = 200;
  CartParams cart{8, 2, 0};  // max_features 0 here means floor(sqrt(p))
};

struct RandomForest {
  std::vector<Tree> trees;

  static RandomForest fit(const Eigen::MatrixXd& x, std::span<const int> y, ForestParams params, Rng& rng) {
    RandomForest forest;
    const auto n = static_cast<std::size_t>(x.rows());
    CartParams cart = params.cart;
    if (cart.max_features == 0)
      cart.max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(x.cols()))));
    GiniTreeBuilder builder(x, y, cart, rng);
    forest.trees.reserve(params.trees);
    for (std::size_t t = 0; t < params.trees; ++t) {
      std::vector<std::size_t> bag(n);
      for (auto& s : bag) s = rng.below(n);
      forest.trees.push_back(builder.build(std::move(bag)));
    }
    return forest;
  }

  /// Mean positive-leaf fraction across trees.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const Eigen::RowVectorXd row = x.row(r);
      double s = 0.0;
      for (const auto& t : trees) s += t.predict(row);
      out[r] = s / static_cast<double>(trees.size());
    }
    return out;
  }
};

}  // namespace prescreen::models
