#pragma once

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "prescreen/csv.hpp"
#include "prescreen/dataset.hpp"
#include "prescreen/error.hpp"
#include "prescreen/models/classifier.hpp"
#include "prescreen/parallel.hpp"
#include "prescreen/rng.hpp"
#include "prescreen/stats.hpp"

namespace prescreen::harness {

using models::ModelKind;

struct CvPlan {
  std::size_t n = 0;
  std::size_t k = 10;
  std::size_t repetitions = 100;
  bool stratified = true;
  std::uint64_t seed = 0;
};

inline void validate(const CvPlan& plan) {
  if (plan.k < 2 || plan.k > plan.n)
    throw Error(ErrorKind::InvalidPlan, "k must satisfy 2 <= k <= n (k=" + std::to_string(plan.k) +
                                            ", n=" + std::to_string(plan.n) + ")");
  if (plan.repetitions < 1) throw Error(ErrorKind::InvalidPlan, "repetitions must be >= 1");
}

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Folds of one repetition. Stratified plans shuffle each class separately,
/// lay positives then negatives end to end and deal position i to fold i % k,
/// so every fold holds floor(P/k) or ceil(P/k) positives.
inline std::vector<Fold> make_repetition(const CvPlan& plan, std::span<const int> labels, std::size_t repetition) {
  validate(plan);
  if (plan.stratified && labels.size() != plan.n)
    throw Error(ErrorKind::InvalidPlan, "stratified plan needs one label per row");
  Rng rng(derive_seed(plan.seed, {repetition}));
  std::vector<std::size_t> order;
  order.reserve(plan.n);
  if (plan.stratified) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < plan.n; ++i) (labels[i] == 1 ? pos : neg).push_back(i);
    rng.shuffle(std::span<std::size_t>(pos));
    rng.shuffle(std::span<std::size_t>(neg));
    order.insert(order.end(), pos.begin(), pos.end());
    order.insert(order.end(), neg.begin(), neg.end());
  } else {
    order.resize(plan.n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
  }
  std::vector<std::size_t> fold_of(plan.n);
  for (std::size_t i = 0; i < plan.n; ++i) fold_of[order[i]] = i % plan.k;

  std::vector<Fold> folds(plan.k);
  for (std::size_t row = 0; row < plan.n; ++row)
    for (std::size_t f = 0; f < plan.k; ++f) (fold_of[row] == f ? folds[f].test : folds[f].train).push_back(row);
  return folds;
}

inline std::vector<std::vector<Fold>> make_folds(const CvPlan& plan, std::span<const int> labels = {}) {
  validate(plan);
  std::vector<std::vector<Fold>> out;
  out.reserve(plan.repetitions);
  for (std::size_t r = 0; r < plan.repetitions; ++r) out.push_back(make_repetition(plan, labels, r));
  return out;
}

struct FoldRef {
  std::size_t repetition = 0;
  std::size_t fold = 0;
  friend bool operator==(const FoldRef&, const FoldRef&) = default;
};

struct ModelResult {
  ModelKind kind{};
  std::vector<double> samples;  // repetition-major, then fold
  std::optional<stats::AucSummary> summary;
  std::optional<std::string> failure;
};

struct BenchmarkReport {
  CvPlan plan;
  std::vector<std::string> features;
  std::uint64_t dataset_hash = 0;
  std::uint64_t config_hash = 0;
  std::vector<FoldRef> skipped_folds;
  std::vector<ModelResult> models;  // in the order requested
  double wall_clock_seconds = 0.0;  // kept out of serialized outputs

  std::vector<std::string> failed_models() const {
    std::vector<std::string> out;
    for (const auto& m : models)
      if (m.failure) out.emplace_back(models::to_string(m.kind));
    return out;
  }
};

inline constexpr double kMaxSkippedFraction = 0.05;

struct BenchOptions {
  std::size_t workers = 1;
  std::map<ModelKind, models::Hyperparams> hyperparams;
};

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Hash of everything besides the data that shapes the results.
inline std::uint64_t config_hash(const CvPlan& plan, std::span<const ModelKind> kinds,
                                 const std::vector<std::string>& features, const BenchOptions& options) {
  std::ostringstream s;
  s << plan.n << '|' << plan.k << '|' << plan.repetitions << '|' << plan.stratified << '|' << plan.seed;
  for (const auto& f : features) s << '|' << f;
  for (auto kind : kinds) {
    s << '|' << models::to_string(kind);
    const auto it = options.hyperparams.find(kind);
    const auto hp = models::resolve_hyperparams(kind, it == options.hyperparams.end() ? models::Hyperparams{} : it->second);
    for (const auto& [key, value] : hp) s << ',' << key << '=' << csv::format_double(value);
  }
  return fnv1a(s.str());
}

/// Every (repetition, fold, kind) task fits on the train rows only and scores
/// the test rows. Folds whose test split is single-class are skipped for all
/// kinds; a NonFiniteLoss marks that kind failed and keeps the others going.
inline BenchmarkReport run_benchmark(const FeatureMatrix& matrix, std::span<const ModelKind> kinds, CvPlan plan,
                                     const BenchOptions& options = {}) {
  const auto start = std::chrono::steady_clock::now();
  plan.n = matrix.rows();
  validate(plan);
  if (kinds.empty()) throw Error(ErrorKind::InvalidPlan, "no model kinds requested");
  for (auto kind : kinds) {
    const auto it = options.hyperparams.find(kind);
    models::resolve_hyperparams(kind, it == options.hyperparams.end() ? models::Hyperparams{} : it->second);
  }
  const auto folds = make_folds(plan, matrix.labels());

  BenchmarkReport report;
  report.plan = plan;
  report.features = matrix.names();
  report.dataset_hash = dataset_hash(matrix);
  report.config_hash = config_hash(plan, kinds, matrix.names(), options);

  std::vector<char> usable(plan.repetitions * plan.k, 1);
  for (std::size_t r = 0; r < plan.repetitions; ++r) {
    for (std::size_t f = 0; f < plan.k; ++f) {
      std::size_t pos = 0;
      for (auto row : folds[r][f].test) pos += static_cast<std::size_t>(matrix.labels()[row]);
      if (pos == 0 || pos == folds[r][f].test.size()) {
        usable[r * plan.k + f] = 0;
        report.skipped_folds.push_back({r, f});
      }
    }
  }
  if (static_cast<double>(report.skipped_folds.size()) > kMaxSkippedFraction * static_cast<double>(usable.size()))
    throw Error(ErrorKind::DegenerateFold, std::to_string(report.skipped_folds.size()) + " of " +
                                               std::to_string(usable.size()) +
                                               " test folds are single-class; lower k or enable stratification");

  const std::size_t per_kind = plan.repetitions * plan.k;
  std::vector<double> auc(per_kind * kinds.size(), 0.0);
  std::vector<std::optional<std::string>> failure(per_kind * kinds.size());
  parallel_for(auc.size(), options.workers, [&](std::size_t task) {
    const std::size_t kind_slot = task / per_kind, cell = task % per_kind;
    const std::size_t r = cell / plan.k, f = cell % plan.k;
    if (!usable[cell]) return;
    const ModelKind kind = kinds[kind_slot];
    const auto hp_it = options.hyperparams.find(kind);
    const models::Hyperparams& overrides =
        hp_it == options.hyperparams.end() ? models::Hyperparams{} : hp_it->second;
    const FeatureMatrix train = matrix.select_rows(folds[r][f].train);
    const FeatureMatrix test = matrix.select_rows(folds[r][f].test);
    try {
      const auto model = models::train_classifier(kind, train, derive_seed(plan.seed, {r, f, models::kind_index(kind)}),
                                                  overrides);
      auc[task] = stats::auc(model.predict_scores(test), test.labels());
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonFiniteLoss) throw;
      failure[task] = e.what();
    }
  });

  for (std::size_t s = 0; s < kinds.size(); ++s) {
    ModelResult result;
    result.kind = kinds[s];
    for (std::size_t cell = 0; cell < per_kind; ++cell) {
      const std::size_t task = s * per_kind + cell;
      if (failure[task] && !result.failure) result.failure = failure[task];
      if (usable[cell]) result.samples.push_back(auc[task]);
    }
    if (result.failure) result.samples.clear();
    else if (result.samples.size() >= 2) result.summary = stats::summarize(result.samples);
    report.models.push_back(std::move(result));
  }
  report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------
// Ranking and serialization

struct ComparisonRow {
  std::size_t rank = 0;
  std::string model;
  stats::AucSummary summary;
};

/// Rows by mean AUC descending, ties broken by lower std.
inline std::vector<ComparisonRow> compare_models(const BenchmarkReport& report) {
  std::vector<ComparisonRow> rows;
  for (const auto& m : report.models)
    if (m.summary) rows.push_back({0, std::string(models::to_string(m.kind)), *m.summary});
  if (rows.empty()) throw Error(ErrorKind::EmptyReport, "report holds no summarized model");
  std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    if (a.summary.mean != b.summary.mean) return a.summary.mean > b.summary.mean;
    return a.summary.std < b.summary.std;
  });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = i + 1;
  return rows;
}

inline void write_summary_csv(const std::vector<ComparisonRow>& rows, std::ostream& out) {
  out << "rank,model,mean,std,p2_5,p97_5,q1,median,q3,samples\n";
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out << r.rank << ',' << r.model << ',' << csv::format_fixed(s.mean, 4) << ',' << csv::format_fixed(s.std, 4) << ','
        << csv::format_fixed(s.p2_5, 4) << ',' << csv::format_fixed(s.p97_5, 4) << ',' << csv::format_fixed(s.q1, 4)
        << ',' << csv::format_fixed(s.median, 4) << ',' << csv::format_fixed(s.q3, 4) << ',' << s.samples.size()
        << '\n';
  }
}

inline void write_summary_csv(const BenchmarkReport& report, std::ostream& out) {
  write_summary_csv(compare_models(report), out);
}

/// One row per (model, repetition, fold) sample, for external plotting.
inline void write_samples_csv(const BenchmarkReport& report, std::ostream& out) {
  out << "model,repetition,fold,auc\n";
  for (const auto& m : report.models) {
    std::size_t next = 0;
    for (std::size_t r = 0; r < report.plan.repetitions; ++r)
      for (std::size_t f = 0; f < report.plan.k; ++f) {
        const FoldRef ref{r, f};
        if (std::find(report.skipped_folds.begin(), report.skipped_folds.end(), ref) != report.skipped_folds.end())
          continue;
        if (next >= m.samples.size()) break;
        out << models::to_string(m.kind) << ',' << r << ',' << f << ',' << csv::format_double(m.samples[next++])
            << '\n';
      }
  }
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << v;
  return s.str();
}

inline std::uint64_t parse_hex64(const std::string& text) { return std::stoull(text, nullptr, 16); }

inline nlohmann::json to_json(const BenchmarkReport& report) {
  nlohmann::json j;
  j["plan"] = {{"n", report.plan.n},
               {"k", report.plan.k},
               {"repetitions", report.plan.repetitions},
               {"stratified", report.plan.stratified},
               {"seed", report.plan.seed}};
  j["features"] = report.features;
  j["dataset_hash"] = hex64(report.dataset_hash);
  j["config_hash"] = hex64(report.config_hash);
  auto& skipped = j["skipped_folds"] = nlohmann::json::array();
  for (const auto& s : report.skipped_folds) skipped.push_back({s.repetition, s.fold});
  auto& models_json = j["models"] = nlohmann::json::array();
  for (const auto& m : report.models) {
    nlohmann::json e{{"model", models::to_string(m.kind)}, {"samples", m.samples}};
    if (m.summary) {
      const auto& s = *m.summary;
      e["summary"] = {{"mean", s.mean}, {"std", s.std},       {"p2_5", s.p2_5}, {"p97_5", s.p97_5},
                      {"q1", s.q1},     {"median", s.median}, {"q3", s.q3}};
    }
    if (m.failure) e["failure"] = *m.failure;
    models_json.push_back(std::move(e));
  }
  j["failed_models"] = report.failed_models();
  return j;
}

inline BenchmarkReport report_from_json(const nlohmann::json& j) {
  BenchmarkReport report;
  const auto& p = j.at("plan");
  report.plan = {p.at("n").get<std::size_t>(), p.at("k").get<std::size_t>(), p.at("repetitions").get<std::size_t>(),
                 p.at("stratified").get<bool>(), p.at("seed").get<std::uint64_t>()};
  report.features = j.at("features").get<std::vector<std::string>>();
  report.dataset_hash = parse_hex64(j.at("dataset_hash").get<std::string>());
  report.config_hash = parse_hex64(j.at("config_hash").get<std::string>());
  for (const auto& s : j.at("skipped_folds")) report.skipped_folds.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
  for (const auto& e : j.at("models")) {
    ModelResult m;
    const auto name = e.at("model").get<std::string>();
    const auto kind = models::parse_model_kind(name);
    if (!kind) throw Error(ErrorKind::InvalidConfig, "unknown model '" + name + "' in report");
    m.kind = *kind;
    m.samples = e.at("samples").get<std::vector<double>>();
    if (e.contains("failure")) m.failure = e.at("failure").get<std::string>();
    else if (m.samples.size() >= 2) m.summary = stats::summarize(m.samples);
    report.models.push_back(std::move(m));
  }
  return report;
}

/// Union of models across reports on the same dataset. A model present in
/// several reports must carry identical samples.
inline BenchmarkReport merge_reports(const std::vector<BenchmarkReport>& reports) {
  if (reports.empty()) throw Error(ErrorKind::EmptyReport, "nothing to merge");
  BenchmarkReport merged = reports.front();
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto& r = reports[i];
    if (r.dataset_hash != merged.dataset_hash)
      throw Error(ErrorKind::MergeConflict, "dataset hash " + hex64(r.dataset_hash) + " differs from " +
                                                hex64(merged.dataset_hash));
    const auto& p = r.plan;
    const auto& q = merged.plan;
    if (p.n != q.n || p.k != q.k || p.repetitions != q.repetitions || p.stratified != q.stratified ||
        p.seed != q.seed || r.features != merged.features)
      throw Error(ErrorKind::MergeConflict, "reports were produced with different folds or feature lists");
    for (const auto& m : r.models) {
      auto it = std::find_if(merged.models.begin(), merged.models.end(),
                             [&](const ModelResult& x) { return x.kind == m.kind; });
      if (it == merged.models.end()) merged.models.push_back(m);
      else if (it->samples != m.samples)
        throw Error(ErrorKind::MergeConflict,
                    std::string(models::to_string(m.kind)) + " appears in several reports with different samples");
    }
    if (r.config_hash != merged.config_hash) merged.config_hash = 0;
  }
  return merged;
}

}  // namespace prescreen::harness
