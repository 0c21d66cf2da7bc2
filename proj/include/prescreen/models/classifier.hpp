#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "prescreen/dataset.hpp"
#include "prescreen/error.hpp"
#include "prescreen/models/gbt.hpp"
#include "prescreen/models/linear.hpp"
#include "prescreen/models/naive_bayes.hpp"
#include "prescreen/models/standardize.hpp"
#include "prescreen/models/svm.hpp"
#include "prescreen/models/tree.hpp"
#include "prescreen/nnet.hpp"
#include "prescreen/rng.hpp"

namespace prescreen::models {

enum class ModelKind {
  DeepLearning,
  Svm,
  NeuralNetwork,
  LogisticRegression,
  XgboostLike,
  RandomForest,
  NaiveBayes,
  StochasticGradient,
};

inline constexpr std::array<ModelKind, 8> kAllKinds = {
    ModelKind::DeepLearning, ModelKind::Svm,          ModelKind::NeuralNetwork, ModelKind::LogisticRegression,
    ModelKind::XgboostLike,  ModelKind::RandomForest, ModelKind::NaiveBayes,    ModelKind::StochasticGradient};

inline std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::DeepLearning: return "deep_learning";
    case ModelKind::Svm: return "svm";
    case ModelKind::NeuralNetwork: return "neural_network";
    case ModelKind::LogisticRegression: return "logistic_regression";
    case ModelKind::XgboostLike: return "xgboost_like";
    case ModelKind::RandomForest: return "random_forest";
    case ModelKind::NaiveBayes: return "naive_bayes";
    case ModelKind::StochasticGradient: return "stochastic_gradient";
  }
  return "unknown";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view name) {
  for (auto k : kAllKinds)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

inline std::size_t kind_index(ModelKind kind) { return static_cast<std::size_t>(kind); }

using Hyperparams = std::map<std::string, double>;

/// Documented defaults per kind; these are also the complete set of keys each
/// kind accepts.
inline Hyperparams default_hyperparams(ModelKind kind) {
  switch (kind) {
    case ModelKind::DeepLearning:
      return {{"layers", 4},          {"width", 100},         {"epochs", 300},    {"batch_size", 10},
              {"learning_rate", 1e-3}, {"kernel_l1", 1e-5},   {"kernel_l2", 1e-4}, {"bias_l2", 1e-4},
              {"activity_l2", 1e-4},  {"beta1", 0.9},         {"beta2", 0.999},   {"epsilon", 1e-8}};
    case ModelKind::NeuralNetwork:
      return {{"layers", 1},        {"width", 32},         {"epochs", 300},    {"batch_size", 10},
              {"learning_rate", 1e-3}, {"kernel_l1", 0.0}, {"kernel_l2", 0.0}, {"bias_l2", 0.0},
              {"activity_l2", 0.0}, {"beta1", 0.9},        {"beta2", 0.999},   {"epsilon", 1e-8}};
    case ModelKind::Svm: return {{"c", 1.0}, {"gamma", 0.0}, {"tolerance", 1e-3}};
    case ModelKind::LogisticRegression: return {{"l2", 1e-4}, {"tolerance", 1e-8}, {"max_iterations", 200}};
    case ModelKind::XgboostLike:
      return {{"trees", 100}, {"max_depth", 3}, {"learning_rate", 0.1},
              {"lambda", 1.0}, {"gamma", 0.0},  {"min_child_weight", 1.0}};
    case ModelKind::RandomForest:
      return {{"trees", 200}, {"max_depth", 8}, {"min_samples_split", 2}, {"max_features", 0}};
    case ModelKind::NaiveBayes: return {{"var_floor", 1e-9}};
    case ModelKind::StochasticGradient: return {{"learning_rate", 0.01}, {"epochs", 50}, {"alpha", 1e-4}};
  }
  return {};
}

/// Defaults overlaid with `overrides`; unknown keys and out-of-range values
/// raise InvalidHyperparam.
inline Hyperparams resolve_hyperparams(ModelKind kind, const Hyperparams& overrides) {
  Hyperparams hp = default_hyperparams(kind);
  for (const auto& [key, value] : overrides) {
    auto it = hp.find(key);
    if (it == hp.end())
      throw Error(ErrorKind::InvalidHyperparam,
                  "unknown hyperparameter '" + key + "' for " + std::string(to_string(kind)));
    if (!std::isfinite(value))
      throw Error(ErrorKind::InvalidHyperparam, "hyperparameter '" + key + "' must be finite");
    it->second = value;
  }
  auto require = [&](const char* key, bool ok, const char* what) {
    if (!ok)
      throw Error(ErrorKind::InvalidHyperparam,
                  std::string(to_string(kind)) + "." + key + " " + what + " (got " + std::to_string(hp[key]) + ")");
  };
  auto whole = [](double v) { return v == std::floor(v); };
  for (const auto& [key, value] : hp) {
    const bool count_key = key == "layers" || key == "width" || key == "epochs" || key == "batch_size" ||
                           key == "trees" || key == "max_depth" || key == "max_iterations" ||
                           key == "min_samples_split";
    if (count_key) require(key.c_str(), value >= 1 && whole(value), "must be a positive integer");
    else if (key == "max_features") require(key.c_str(), value >= 0 && whole(value), "must be a non-negative integer");
    else if (key == "learning_rate" || key == "c" || key == "tolerance" || key == "var_floor")
      require(key.c_str(), value > 0, "must be > 0");
    else if (key == "beta1" || key == "beta2") require(key.c_str(), value >= 0 && value < 1, "must lie in [0, 1)");
    else if (key == "epsilon") require(key.c_str(), value > 0, "must be > 0");
    else require(key.c_str(), value >= 0, "must be >= 0");
  }
  return hp;
}

inline nnet::NetworkSpec network_spec_from(const Hyperparams& hp, std::size_t input_dim, std::uint64_t seed) {
  nnet::NetworkSpec spec;
  spec.input_dim = input_dim;
  const nnet::Regularization reg{hp.at("kernel_l1"), hp.at("kernel_l2"), hp.at("bias_l2"), hp.at("activity_l2")};
  spec.hidden.assign(static_cast<std::size_t>(hp.at("layers")),
                     nnet::LayerSpec{static_cast<std::size_t>(hp.at("width")), nnet::Activation::ReLU, reg});
  spec.epochs = static_cast<std::size_t>(hp.at("epochs"));
  spec.batch_size = static_cast<std::size_t>(hp.at("batch_size"));
  spec.learning_rate = hp.at("learning_rate");
  spec.adam = {hp.at("beta1"), hp.at("beta2"), hp.at("epsilon")};
  spec.optimizer = nnet::Optimizer::Adam;
  spec.seed = seed;
  return spec;
}

/// True for kinds trained on z-scored features (train-split statistics).
inline bool uses_standardization(ModelKind kind) {
  return kind == ModelKind::DeepLearning || kind == ModelKind::NeuralNetwork || kind == ModelKind::Svm ||
         kind == ModelKind::LogisticRegression || kind == ModelKind::StochasticGradient;
}

class Classifier {
 public:
  using State = std::variant<nnet::Network, RbfSvm, LinearModel, BoostedTrees, RandomForest, GaussianNaiveBayes>;

  Classifier(ModelKind kind, std::vector<std::string> features, std::optional<Standardizer> scaler, State state)
      : kind_(kind), features_(std::move(features)), scaler_(std::move(scaler)), state_(std::move(state)) {}

  ModelKind kind() const noexcept { return kind_; }
  const std::vector<std::string>& feature_names() const noexcept { return features_; }
  const State& state() const noexcept { return state_; }

  /// Higher = more cancer-like. Probabilities for every kind except svm,
  /// which returns signed margins.
  std::vector<double> predict_scores(const FeatureMatrix& m) const {
    if (m.names() != features_)
      throw Error(ErrorKind::FeatureMismatch, "scoring columns differ from the columns used at fit time");
    const Eigen::MatrixXd x = scaler_ ? scaler_->apply(m.values()) : m.values();
    const Eigen::VectorXd s = std::visit(
        [&](const auto& model) -> Eigen::VectorXd {
          using T = std::decay_t<decltype(model)>;
          if constexpr (std::is_same_v<T, nnet::Network>) return model.forward(x);
          else if constexpr (std::is_same_v<T, RbfSvm>) return model.decision(x);
          else if constexpr (std::is_same_v<T, RandomForest>) return model.predict(x);
          else return model.predict_proba(x);
        },
        state_);
    return {s.data(), s.data() + s.size()};
  }

 private:
  ModelKind kind_;
  std::vector<std::string> features_;
  std::optional<Standardizer> scaler_;
  State state_;
};

inline Classifier train_classifier(ModelKind kind, const FeatureMatrix& m, std::uint64_t seed,
                                   const Hyperparams& overrides = {}) {
  const auto pos = m.positives();
  if (pos == 0 || pos == m.rows()) throw Error(ErrorKind::SingleClass, "training data holds a single class");
  const Hyperparams hp = resolve_hyperparams(kind, overrides);

  std::optional<Standardizer> scaler;
  Eigen::MatrixXd x;
  if (uses_standardization(kind)) {
    scaler = Standardizer::fit(m.values());
    x = scaler->apply(m.values());
  } else {
    x = m.values();
  }
  const std::span<const int> y = m.labels();
  Rng rng(seed);
  auto count = [&](const char* key) { return static_cast<std::size_t>(hp.at(key)); };

  Classifier::State state = [&]() -> Classifier::State {
    switch (kind) {
      case ModelKind::DeepLearning:
      case ModelKind::NeuralNetwork:
        return nnet::train(network_spec_from(hp, m.cols(), rng.next_u64()), x, y).network;
      case ModelKind::Svm: return RbfSvm::fit(x, y, {hp.at("c"), hp.at("gamma"), hp.at("tolerance")});
      case ModelKind::LogisticRegression:
        return fit_logistic(x, y, {hp.at("l2"), hp.at("tolerance"), count("max_iterations")});
      case ModelKind::XgboostLike:
        return BoostedTrees::fit(x, y,
                                 {count("trees"), count("max_depth"), hp.at("learning_rate"), hp.at("lambda"),
                                  hp.at("gamma"), hp.at("min_child_weight")});
      case ModelKind::RandomForest:
        return RandomForest::fit(
            x, y, {count("trees"), CartParams{count("max_depth"), count("min_samples_split"), count("max_features")}},
            rng);
      case ModelKind::NaiveBayes: return GaussianNaiveBayes::fit(x, y, hp.at("var_floor"));
      case ModelKind::StochasticGradient:
        return fit_sgd(x, y, {hp.at("learning_rate"), count("epochs"), hp.at("alpha")}, rng);
    }
    throw Error(ErrorKind::InvalidHyperparam, "unknown model kind");
  }();
  return Classifier(kind, m.names(), std::move(scaler), std::move(state));
}

inline std::vector<double> predict_scores(const Classifier& model, const FeatureMatrix& m) {
  return model.predict_scores(m);
}

}  // namespace prescreen::models
