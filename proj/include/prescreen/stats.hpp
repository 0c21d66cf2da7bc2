#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "prescreen/error.hpp"

namespace prescreen::stats {

inline double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
inline double sample_std(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "pearson: vectors differ in length");
  if (x.size() < 2) throw Error(ErrorKind::LengthMismatch, "pearson: need at least 2 observations");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::ConstantInput, "pearson: constant input");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

/// Bin index per observation. Features with at most `bins` distinct values
/// keep one bin per value (binary flags get their two natural levels);
/// otherwise bins are equal-frequency over the sort order, and tied values
/// always share the bin of the first occurrence.
inline std::vector<std::size_t> equal_frequency_bins(std::span<const double> x, std::size_t bins) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  std::size_t distinct = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (i == 0 || x[order[i]] != x[order[i - 1]]) ++distinct;

  std::vector<std::size_t> bin(n);
  std::size_t level = 0, current = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool new_value = i == 0 || x[order[i]] != x[order[i - 1]];
    if (distinct <= bins) {
      if (new_value && i > 0) ++level;
      bin[order[i]] = level;
    } else {
      if (new_value) current = i * bins / n;
      bin[order[i]] = current;
    }
  }
  return bin;
}

/// Plug-in mutual information in bits between binned x and a binary label.
inline double mutual_information(std::span<const double> x, std::span<const int> y, std::size_t bins) {
  if (x.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "mutual_information: vectors differ in length");
  if (bins < 2) throw Error(ErrorKind::InvalidHyperparam, "mutual_information: bins must be >= 2");
  const std::size_t n = x.size();
  std::size_t pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw Error(ErrorKind::RangeViolation, "mutual_information: labels must be 0/1");
    pos += static_cast<std::size_t>(v);
  }
  if (pos == 0 || pos == n) throw Error(ErrorKind::SingleClass, "mutual_information: only one class present");

  const auto bin = equal_frequency_bins(x, bins);
  const std::size_t levels = *std::max_element(bin.begin(), bin.end()) + 1;
  std::vector<double> joint(levels * 2, 0.0), marginal(levels, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    joint[bin[i] * 2 + static_cast<std::size_t>(y[i])] += 1.0;
    marginal[bin[i]] += 1.0;
  }
  const double nn = static_cast<double>(n);
  const double py[2] = {static_cast<double>(n - pos) / nn, static_cast<double>(pos) / nn};
  double mi = 0.0;
  for (std::size_t b = 0; b < levels; ++b) {
    for (std::size_t c = 0; c < 2; ++c) {
      const double pj = joint[b * 2 + c] / nn;
      if (pj > 0.0) mi += pj * std::log2(pj / ((marginal[b] / nn) * py[c]));
    }
  }
  return std::max(0.0, mi);
}

/// Mann-Whitney AUC via midranks; ties count one half.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorKind::LengthMismatch, "auc: vectors differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // 1-based ranks i+1..j share the midrank (i + 1 + j) / 2.
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum_pos += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(ErrorKind::SingleClass, "auc: both classes must be present");
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

/// Linear interpolation between order statistics at position q * (n - 1).
inline double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorKind::TooFewSamples, "percentile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct AucSummary {
  double mean = 0.0;
  double std = 0.0;
  double p2_5 = 0.0;
  double p97_5 = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  std::vector<double> samples;
};

inline AucSummary summarize(std::vector<double> samples) {
  if (samples.size() < 2) throw Error(ErrorKind::TooFewSamples, "summarize needs at least 2 samples");
  AucSummary s;
  s.mean = mean(samples);
  s.std = sample_std(samples);
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  s.p2_5 = percentile(sorted, 0.025);
  s.p97_5 = percentile(sorted, 0.975);
  s.q1 = percentile(sorted, 0.25);
  s.median = percentile(sorted, 0.5);
  s.q3 = percentile(sorted, 0.75);
  s.samples = std::move(samples);
  return s;
}

}  // namespace prescreen::stats
