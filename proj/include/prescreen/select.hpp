#pragma once

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "prescreen/csv.hpp"
#include "prescreen/dataset.hpp"
#include "prescreen/error.hpp"
#include "prescreen/models/gbt.hpp"
#include "prescreen/parallel.hpp"
#include "prescreen/rng.hpp"
#include "prescreen/stats.hpp"

namespace prescreen::select {

struct SweepConfig {
  std::vector<double> rho_grid;
  std::size_t mi_bins = 10;
  std::size_t boosting_rounds = 100;  // trees per boosted fit
  std::size_t tree_depth = 3;
  double split_fraction = 0.75;
  std::size_t rounds = 5;  // repeated train/test draws per grid point
  std::uint64_t seed = 0;
  std::size_t top_m = 0;  // 0 keeps every feature with positive importance
};

/// Inclusive arithmetic grid; points are rounded to 1e-12 so 0.01:0.99:0.01
/// yields exactly 99 clean values.
inline std::vector<double> make_grid(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start) throw Error(ErrorKind::InvalidConfig, "grid needs step > 0 and stop >= start");
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i)
    grid.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
  return grid;
}

inline std::vector<double> default_grid() { return make_grid(0.01, 0.99, 0.01); }

inline SweepConfig default_sweep_config() {
  SweepConfig cfg;
  cfg.rho_grid = default_grid();
  return cfg;
}

inline void validate(const SweepConfig& cfg) {
  if (cfg.rho_grid.empty()) throw Error(ErrorKind::InvalidConfig, "rho grid is empty");
  for (std::size_t i = 0; i < cfg.rho_grid.size(); ++i) {
    const double r = cfg.rho_grid[i];
    if (!(r > 0.0 && r < 1.0)) throw Error(ErrorKind::InvalidConfig, "every rho must lie strictly in (0, 1)");
    if (i > 0 && !(r > cfg.rho_grid[i - 1]))
      throw Error(ErrorKind::InvalidConfig, "rho grid must be strictly increasing");
  }
  if (!(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0))
    throw Error(ErrorKind::InvalidConfig, "split_fraction must lie strictly in (0, 1)");
  if (cfg.mi_bins < 2) throw Error(ErrorKind::InvalidConfig, "mi_bins must be >= 2");
  if (cfg.rounds == 0 || cfg.boosting_rounds == 0 || cfg.tree_depth == 0)
    throw Error(ErrorKind::InvalidConfig, "rounds, boosting_rounds and tree_depth must be >= 1");
}

// ---------------------------------------------------------------------------
// SULOV redundancy elimination

/// Pairwise |Pearson| and per-feature MI with the label; shared by every
/// grid point since neither depends on rho.
struct Relevance {
  std::vector<std::vector<double>> abs_corr;
  std::vector<double> mi;
};

inline Relevance compute_relevance(const FeatureMatrix& m, std::size_t mi_bins) {
  const std::size_t p = m.cols();
  std::vector<std::vector<double>> cols(p);
  for (std::size_t c = 0; c < p; ++c) {
    const auto col = m.values().col(static_cast<Eigen::Index>(c));
    cols[c].assign(col.data(), col.data() + col.size());
  }
  Relevance rel;
  rel.abs_corr.assign(p, std::vector<double>(p, 0.0));
  rel.mi.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    rel.abs_corr[i][i] = 1.0;
    for (std::size_t j = i + 1; j < p; ++j)
      rel.abs_corr[i][j] = rel.abs_corr[j][i] = std::abs(stats::pearson(cols[i], cols[j]));
    rel.mi[i] = stats::mutual_information(cols[i], m.labels(), mi_bins);
  }
  return rel;
}

/// Edges are pairs with |corr| > rho, resolved by descending |corr| (ties by
/// column order). For each edge whose endpoints are both still kept, the lower
/// MI endpoint is dropped; on equal MI the later column goes.
inline std::vector<std::string> sulov(const FeatureMatrix& m, const Relevance& rel, double rho) {
  const std::size_t p = m.cols();
  std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j)
      if (rel.abs_corr[i][j] > rho) edges.emplace_back(rel.abs_corr[i][j], i, j);
  std::stable_sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
  });
  std::vector<char> kept(p, 1);
  for (const auto& [corr, i, j] : edges) {
    if (!kept[i] || !kept[j]) continue;
    kept[rel.mi[i] >= rel.mi[j] ? j : i] = 0;
  }
  std::vector<std::string> out;
  for (std::size_t c = 0; c < p; ++c)
    if (kept[c]) out.push_back(m.names()[c]);
  return out;
}

inline std::vector<std::string> sulov(const FeatureMatrix& m, double rho, std::size_t mi_bins = 10) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::InvalidConfig, "rho must lie strictly in (0, 1)");
  return sulov(m, compute_relevance(m, mi_bins), rho);
}

// ---------------------------------------------------------------------------
// Boosted relevance ranking

struct RankedFeature {
  std::string name;
  double importance = 0.0;
};

inline constexpr std::size_t kMaxSplitAttempts = 10;

/// Repeated seeded train/test draws; each fits a boosted ensemble on the
/// training rows over `candidates` and accumulates total-gain importance.
/// `stream` separates independent callers sharing one master seed.
inline std::vector<RankedFeature> boosted_rank(const FeatureMatrix& m, const std::vector<std::string>& candidates,
                                               const SweepConfig& cfg, std::uint64_t stream = 0) {
  if (candidates.size() < 2) throw Error(ErrorKind::InvalidConfig, "boosted_rank needs at least 2 candidates");
  const FeatureMatrix sub = m.select_columns(candidates);
  const std::size_t n = sub.rows();
  const auto n_train = static_cast<std::size_t>(std::floor(cfg.split_fraction * static_cast<double>(n)));
  std::vector<double> importance(candidates.size(), 0.0);
  const models::BoostParams params{cfg.boosting_rounds, cfg.tree_depth, 0.1, 1.0, 0.0, 1.0};

  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    std::vector<std::size_t> train;
    bool ok = false;
    for (std::size_t attempt = 0; attempt < kMaxSplitAttempts && !ok; ++attempt) {
      Rng rng(derive_seed(cfg.seed, {stream, round, attempt}));
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      rng.shuffle(std::span<std::size_t>(idx));
      std::size_t train_pos = 0, test_pos = 0;
      for (std::size_t i = 0; i < n; ++i) (i < n_train ? train_pos : test_pos) += static_cast<std::size_t>(sub.labels()[idx[i]]);
      ok = train_pos > 0 && train_pos < n_train && test_pos > 0 && test_pos < n - n_train;
      if (ok) {
        train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        std::sort(train.begin(), train.end());
      }
    }
    if (!ok)
      throw Error(ErrorKind::DegenerateSplit, "no train/test split with both classes after " +
                                                  std::to_string(kMaxSplitAttempts) + " attempts");
    const FeatureMatrix part = sub.select_rows(train);
    const auto model = models::BoostedTrees::fit(part.values(), part.labels(), params);
    for (std::size_t f = 0; f < importance.size(); ++f) importance[f] += model.importance()[f];
  }

  std::vector<RankedFeature> ranked;
  for (std::size_t f = 0; f < candidates.size(); ++f)
    if (importance[f] > 0.0) ranked.push_back({candidates[f], importance[f]});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedFeature& a, const RankedFeature& b) { return a.importance > b.importance; });
  if (cfg.top_m > 0 && ranked.size() > cfg.top_m) ranked.resize(cfg.top_m);
  return ranked;
}

// ---------------------------------------------------------------------------
// Sweep over the correlation threshold

struct FeatureFrequency {
  std::string name;
  std::size_t frequency = 0;
  std::optional<double> min_rho;
  std::optional<double> mean_rho;
  std::optional<double> std_rho;  // sample std over the grid points where selected
};

struct SelectionReport {
  std::vector<double> rho_grid;
  std::vector<FeatureFrequency> features;  // input column order
  std::vector<std::vector<std::string>> selected_per_rho;

  /// Features sorted by frequency, most frequent first (ties keep column order).
  std::vector<FeatureFrequency> ranked() const {
    auto out = features;
    std::stable_sort(out.begin(), out.end(),
                     [](const FeatureFrequency& a, const FeatureFrequency& b) { return a.frequency > b.frequency; });
    return out;
  }

  std::vector<std::string> selected(std::size_t min_frequency) const {
    std::vector<std::string> out;
    for (const auto& f : ranked())
      if (f.frequency >= min_frequency && f.frequency > 0) out.push_back(f.name);
    return out;
  }
};

inline SelectionReport sweep(const FeatureMatrix& m, const SweepConfig& cfg, std::size_t workers = 1) {
  validate(cfg);
  const Relevance rel = compute_relevance(m, cfg.mi_bins);
  const std::size_t g = cfg.rho_grid.size();
  std::vector<std::vector<std::string>> selected(g);
  parallel_for(g, workers, [&](std::size_t k) {
    const auto kept = sulov(m, rel, cfg.rho_grid[k]);
    if (kept.size() < 2) {
      selected[k] = kept;
      return;
    }
    auto ranked = boosted_rank(m, kept, cfg, k);
    std::vector<std::string> names;
    for (const auto& c : kept)
      if (std::any_of(ranked.begin(), ranked.end(), [&](const RankedFeature& r) { return r.name == c; }))
        names.push_back(c);
    selected[k] = std::move(names);
  });

  SelectionReport report;
  report.rho_grid = cfg.rho_grid;
  for (const auto& name : m.names()) {
    std::vector<double> rhos;
    for (std::size_t k = 0; k < g; ++k)
      if (std::find(selected[k].begin(), selected[k].end(), name) != selected[k].end()) rhos.push_back(cfg.rho_grid[k]);
    FeatureFrequency f{name, rhos.size(), {}, {}, {}};
    if (!rhos.empty()) {
      f.min_rho = *std::min_element(rhos.begin(), rhos.end());
      f.mean_rho = stats::mean(rhos);
      f.std_rho = stats::sample_std(rhos);
    }
    report.features.push_back(std::move(f));
  }
  report.selected_per_rho = std::move(selected);
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

inline void write_csv(const SelectionReport& r, std::ostream& out) {
  auto opt = [](const std::optional<double>& v) { return v ? csv::format_fixed(*v, 4) : std::string(); };
  out << "feature,frequency,min_rho,mean_rho,std_rho\n";
  for (const auto& f : r.ranked())
    out << f.name << ',' << f.frequency << ',' << opt(f.min_rho) << ',' << opt(f.mean_rho) << ',' << opt(f.std_rho)
        << '\n';
}

inline nlohmann::json to_json(const SelectionReport& r) {
  nlohmann::json j;
  j["rho_grid"] = r.rho_grid;
  auto& feats = j["features"] = nlohmann::json::array();
  for (const auto& f : r.ranked()) {
    nlohmann::json e{{"name", f.name}, {"frequency", f.frequency}};
    e["min_rho"] = f.min_rho ? nlohmann::json(*f.min_rho) : nlohmann::json(nullptr);
    e["mean_rho"] = f.mean_rho ? nlohmann::json(*f.mean_rho) : nlohmann::json(nullptr);
    e["std_rho"] = f.std_rho ? nlohmann::json(*f.std_rho) : nlohmann::json(nullptr);
    feats.push_back(std::move(e));
  }
  j["selected_per_rho"] = r.selected_per_rho;
  return j;
}

inline SelectionReport from_json(const nlohmann::json& j) {
  SelectionReport r;
  r.rho_grid = j.at("rho_grid").get<std::vector<double>>();
  for (const auto& e : j.at("features")) {
    FeatureFrequency f;
    f.name = e.at("name").get<std::string>();
    f.frequency = e.at("frequency").get<std::size_t>();
    auto opt = [&](const char* key) -> std::optional<double> {
      if (!e.contains(key) || e.at(key).is_null()) return std::nullopt;
      return e.at(key).get<double>();
    };
    f.min_rho = opt("min_rho");
    f.mean_rho = opt("mean_rho");
    f.std_rho = opt("std_rho");
    r.features.push_back(std::move(f));
  }
  r.selected_per_rho = j.at("selected_per_rho").get<std::vector<std::vector<std::string>>>();
  return r;
}

}  // namespace prescreen::select
