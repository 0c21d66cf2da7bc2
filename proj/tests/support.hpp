#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "prescreen/prescreen.hpp"

namespace testsupport {

using prescreen::FeatureMatrix;
using prescreen::Rng;

/// O(n^2) Mann-Whitney pair count.
inline double auc_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        ++pairs;
        if (s[i] > s[j]) wins += 1.0;
        else if (s[i] == s[j]) wins += 0.5;
      }
  return wins / static_cast<double>(pairs);
}

/// Max over parameters of |analytic - central difference| / max(|analytic|, |numeric|, floor).
/// The floor keeps near-zero gradients from turning rounding noise into a huge ratio.
inline double gradient_check(prescreen::nnet::Network net, const Eigen::MatrixXd& x, const std::vector<int>& y,
                             double h = 1e-5, double floor = 1e-6) {
  const auto analytic = net.loss_and_gradient(x, y).gradient;
  auto params = net.parameters();
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = net.loss(x, y);
    params[i] = saved - h;
    const double down = net.loss(x, y);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

/// Random small network with every regularizer switched on and mixed activations.
inline prescreen::nnet::Network random_network(Rng& rng, Eigen::MatrixXd& x, std::vector<int>& y) {
  using namespace prescreen::nnet;
  NetworkSpec spec;
  spec.input_dim = 1 + rng.below(4);
  const std::size_t depth = 1 + rng.below(3);
  for (std::size_t l = 0; l < depth; ++l) {
    const auto act = static_cast<Activation>(rng.below(3));
    spec.hidden.push_back({1 + rng.below(5), act,
                           {rng.uniform(0, 1e-2), rng.uniform(0, 1e-2), rng.uniform(0, 1e-2), rng.uniform(0, 1e-2)}});
  }
  auto net = Network::initialized(spec, rng);
  for (auto& p : net.parameters()) p += rng.uniform(-0.1, 0.1);  // nonzero biases too
  const std::size_t n = 2 + rng.below(6);
  x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.input_dim));
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(static_cast<Eigen::Index>(i), c) = rng.normal();
    y[i] = static_cast<int>(rng.below(2));
  }
  return net;
}

inline FeatureMatrix make_matrix(std::vector<std::string> names, const std::vector<std::vector<double>>& cols,
                                 std::vector<int> labels) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < labels.size(); ++r)
      v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cols[c][r];
  return FeatureMatrix(std::move(names), std::move(v), std::move(labels));
}

/// Two Gaussian blobs, `informative` columns shifted by `shift` for the
/// positive class, the rest pure noise.
inline FeatureMatrix blobs(std::size_t n, std::size_t informative, std::size_t noise, double shift,
                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = i % 2 == 0 ? 1 : 0;
  std::vector<std::vector<double>> cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < informative + noise; ++c) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = rng.normal() + (c < informative && y[i] == 1 ? shift : 0.0);
    cols.push_back(std::move(col));
    names.push_back((c < informative ? "x" : "noise") + std::to_string(c));
  }
  return make_matrix(names, cols, y);
}

/// Patient CSV in the public Coimbra layout with plausible ranges; labels
/// carry signal through glucose, resistin and age. Not the real data.
inline std::string synthetic_patients_csv(std::size_t n, std::size_t cancer, std::uint64_t seed) {
  Rng rng(seed);
  std::ostringstream out;
  out << "Age,BMI,Glucose,Insulin,HOMA,Leptin,Adiponectin,Resistin,MCP.1,Classification\n";
  auto clip = [](double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); };
  for (std::size_t i = 0; i < n; ++i) {
    const bool sick = i < cancer;
    const int age = static_cast<int>(std::lround(clip(rng.normal(sick ? 60.0 : 54.0, 15.0), 24, 89)));
    const double bmi = clip(rng.normal(27.5, 5.0), 18.4, 38.5);
    const double glucose = clip(rng.normal(sick ? 105.0 : 88.0, 12.0), 60.0, 201.0);
    const double insulin = clip(std::exp(rng.normal(sick ? 2.2 : 1.8, 0.6)), 2.4, 58.5);
    const double homa = insulin * glucose / 405.36;
    const double leptin = clip(std::exp(rng.normal(3.0, 0.6)), 4.3, 90.0);
    const double adiponectin = clip(std::exp(rng.normal(2.1, 0.5)), 1.7, 38.0);
    const double resistin = clip(std::exp(rng.normal(sick ? 2.7 : 2.2, 0.5)), 3.2, 82.1);
    const double mcp = clip(rng.normal(sick ? 560.0 : 500.0, 200.0), 45.8, 1698.0);
    out << age << ',' << prescreen::csv::format_fixed(bmi, 4) << ',' << prescreen::csv::format_fixed(glucose, 0) << ','
        << prescreen::csv::format_fixed(insulin, 3) << ',' << prescreen::csv::format_fixed(homa, 6) << ','
        << prescreen::csv::format_fixed(leptin, 4) << ',' << prescreen::csv::format_fixed(adiponectin, 6) << ','
        << prescreen::csv::format_fixed(resistin, 5) << ',' << prescreen::csv::format_fixed(mcp, 3) << ','
        << (sick ? 2 : 1) << '\n';
  }
  return out.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("prescreen_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace testsupport
