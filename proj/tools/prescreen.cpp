// prescreen: describe / select / bench / report driver.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "prescreen/prescreen.hpp"

namespace fs = std::filesystem;
using namespace prescreen;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string models;
  std::optional<std::size_t> k;
  std::optional<std::size_t> repetitions;
  std::string rho_grid;
  std::string out;
  std::string dataset;
  std::string columns;
  std::string features;
  std::string selection;
  std::vector<std::string> inputs;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateSplit:
    case ErrorKind::DegenerateFold:
    case ErrorKind::SingleClass:
    case ErrorKind::ConstantInput:
    case ErrorKind::TooFewRows:
    case ErrorKind::TooFewSamples: return 3;
    case ErrorKind::NonFiniteLoss: return 4;
    case ErrorKind::MergeConflict: return 5;
    default: return 2;
  }
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("prescreen");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("PRESCREEN_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

config::ExperimentConfig resolve(const Overrides& o) {
  config::ExperimentConfig cfg = o.config.empty() ? config::ExperimentConfig{} : config::load(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (!o.models.empty()) cfg.kinds = config::parse_kinds(o.models);
  if (o.k) cfg.plan.k = *o.k;
  if (o.repetitions) cfg.plan.repetitions = *o.repetitions;
  if (!o.rho_grid.empty()) config::parse_rho_grid(o.rho_grid, cfg);
  if (!o.out.empty()) cfg.out = o.out;
  if (!o.dataset.empty()) cfg.dataset = o.dataset;
  if (!o.features.empty()) cfg.features = config::split_list(o.features);
  cfg.plan.seed = cfg.seed;
  cfg.sweep.seed = cfg.seed;
  if (cfg.workers == 0) cfg.workers = default_workers();
  return cfg;
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::FileNotFound, "cannot write " + path.string());
  return out;
}

bool tables_present(const config::ExperimentConfig& cfg) {
  return fs::exists(cfg.age_table) && fs::exists(cfg.bmi_table_premenopausal) &&
         (cfg.bmi_table_postmenopausal.empty() || fs::exists(cfg.bmi_table_postmenopausal));
}

FeatureMatrix augmented_matrix(const config::ExperimentConfig& cfg) {
  const auto records = load_patients(cfg.dataset, cfg.schema);
  const RiskTable age = load_risk_table(cfg.age_table, RiskKind::AgeBased);
  BmiRiskTables bmi{load_risk_table(cfg.bmi_table_premenopausal, RiskKind::BmiBased), std::nullopt, cfg.menopause_age};
  if (!cfg.bmi_table_postmenopausal.empty())
    bmi.postmenopausal = load_risk_table(cfg.bmi_table_postmenopausal, RiskKind::BmiBased);
  spdlog::debug("loaded {} records from {}", records.size(), cfg.dataset.string());
  return join_relative_risks(records, age, bmi);
}

int cmd_describe(const Overrides& o) {
  const auto cfg = resolve(o);
  config::validate(cfg, false);
  const auto records = load_patients(cfg.dataset, cfg.schema);
  const FeatureMatrix m = tables_present(cfg) ? augmented_matrix(cfg) : measured_matrix(records);
  auto rows = describe(m);
  if (!o.columns.empty()) {
    const auto wanted = config::split_list(o.columns);
    for (const auto& w : wanted)
      if (!m.index_of(w)) throw Error(ErrorKind::MissingColumn, "column '" + w + "' is not a known feature");
    std::erase_if(rows, [&](const ColumnSummary& s) {
      return std::find(wanted.begin(), wanted.end(), s.name) == wanted.end();
    });
  }
  auto csv_out = open_out(cfg.out / "describe.csv");
  auto txt_out = open_out(cfg.out / "describe.txt");
  csv_out << "variable,mean,std,min,max\n";
  txt_out << std::left << std::setw(16) << "Variable" << std::right << std::setw(12) << "Mean" << std::setw(12)
          << "Std.Dev." << std::setw(12) << "Min" << std::setw(12) << "Max" << '\n';
  for (const auto& s : rows) {
    csv_out << s.name << ',' << csv::format_fixed(s.mean, 4) << ',' << csv::format_fixed(s.std, 4) << ','
            << csv::format_double(s.min) << ',' << csv::format_double(s.max) << '\n';
    txt_out << std::left << std::setw(16) << s.name << std::right << std::setw(12) << csv::format_fixed(s.mean, 2)
            << std::setw(12) << csv::format_fixed(s.std, 2) << std::setw(12) << csv::format_fixed(s.min, 2)
            << std::setw(12) << csv::format_fixed(s.max, 2) << '\n';
  }
  txt_out.close();
  std::cout << std::ifstream(cfg.out / "describe.txt").rdbuf();
  spdlog::info("wrote {} rows to {}", rows.size(), (cfg.out / "describe.csv").string());
  return 0;
}

std::size_t frequency_cutoff(const config::ExperimentConfig& cfg) {
  return static_cast<std::size_t>(
      std::ceil(cfg.min_frequency_fraction * static_cast<double>(cfg.sweep.rho_grid.size()) - 1e-9));
}

int cmd_select(const Overrides& o) {
  const auto cfg = resolve(o);
  config::validate(cfg);
  const FeatureMatrix m = augmented_matrix(cfg);
  spdlog::info("sweeping {} rho values over {} features with {} workers", cfg.sweep.rho_grid.size(), m.cols(),
               cfg.workers);
  const auto report = select::sweep(m, cfg.sweep, cfg.workers);
  {
    auto out = open_out(cfg.out / "selection.csv");
    select::write_csv(report, out);
  }
  {
    auto out = open_out(cfg.out / "selection.json");
    auto j = select::to_json(report);
    j["min_frequency"] = frequency_cutoff(cfg);
    j["selected"] = report.selected(frequency_cutoff(cfg));
    out << j.dump(2) << '\n';
  }
  const auto chosen = report.selected(frequency_cutoff(cfg));
  std::cout << "selected (frequency >= " << frequency_cutoff(cfg) << " of " << report.rho_grid.size()
            << "): " << config::join_list(chosen) << '\n';
  return 0;
}

std::vector<std::string> bench_features(const config::ExperimentConfig& cfg, const Overrides& o) {
  if (!cfg.features.empty()) return cfg.features;
  const fs::path path = o.selection.empty() ? cfg.out / "selection.json" : fs::path(o.selection);
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::InvalidConfig,
                "no feature list: pass --features, set [bench] features, or run select first (" + path.string() + ")");
  const auto j = nlohmann::json::parse(in);
  auto names = j.at("selected").get<std::vector<std::string>>();
  if (names.empty()) throw Error(ErrorKind::InvalidConfig, "selection output at " + path.string() + " selected nothing");
  return names;
}

int cmd_bench(const Overrides& o) {
  const auto cfg = resolve(o);
  config::validate(cfg);
  const FeatureMatrix full = augmented_matrix(cfg);
  const auto features = bench_features(cfg, o);
  for (const auto& f : features)
    if (!full.index_of(f)) throw Error(ErrorKind::MissingColumn, "feature '" + f + "' is not a known column");
  const FeatureMatrix m = full.select_columns(features);
  spdlog::info("benchmarking {} models on [{}], k={} repetitions={} workers={}", cfg.kinds.size(),
               config::join_list(features), cfg.plan.k, cfg.plan.repetitions, cfg.workers);

  const auto report = harness::run_benchmark(m, cfg.kinds, cfg.plan, {cfg.workers, cfg.hyperparams});
  for (const auto& name : report.failed_models()) spdlog::error("{} failed: non-finite training loss", name);
  {
    auto out = open_out(cfg.out / "bench_report.json");
    out << harness::to_json(report).dump(2) << '\n';
  }
  {
    auto out = open_out(cfg.out / "bench_samples.csv");
    harness::write_samples_csv(report, out);
  }
  {
    auto out = open_out(cfg.out / "run_info.json");
    out << nlohmann::json{{"wall_clock_seconds", report.wall_clock_seconds}, {"workers", cfg.workers}}.dump(2)
        << '\n';
  }
  std::vector<harness::ComparisonRow> rows;
  if (std::any_of(report.models.begin(), report.models.end(), [](const auto& r) { return r.summary.has_value(); }))
    rows = harness::compare_models(report);
  {
    auto out = open_out(cfg.out / "bench_summary.csv");
    harness::write_summary_csv(rows, out);
  }
  {
    auto out = open_out(cfg.out / "bench_boxplot.svg");
    plot::write_boxplot_svg(rows, out);
  }
  harness::write_summary_csv(rows, std::cout);
  spdlog::info("finished in {:.1f} s", report.wall_clock_seconds);
  return report.failed_models().empty() ? 0 : 4;
}

int cmd_report(const Overrides& o) {
  if (o.inputs.empty()) throw Error(ErrorKind::InvalidConfig, "report needs at least one input file");
  std::vector<harness::BenchmarkReport> reports;
  for (const auto& path : o.inputs) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileNotFound, "cannot open report " + path);
    try {
      reports.push_back(harness::report_from_json(nlohmann::json::parse(in)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::InvalidConfig, path + ": " + e.what());
    }
  }
  const auto merged = harness::merge_reports(reports);
  const auto rows = harness::compare_models(merged);
  if (!o.out.empty()) {
    auto out = open_out(fs::path(o.out) / "report_summary.csv");
    harness::write_summary_csv(rows, out);
    auto svg = open_out(fs::path(o.out) / "report_boxplot.svg");
    plot::write_boxplot_svg(rows, svg);
  }
  harness::write_summary_csv(rows, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Breast cancer pre-screening benchmark"};
  app.require_subcommand(1);
  Overrides o;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "INI experiment config");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--workers", o.workers, "worker threads (default: machine parallelism)");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--dataset", o.dataset, "patient CSV");
  };
  auto* describe_cmd = app.add_subcommand("describe", "descriptive statistics per column");
  common(describe_cmd);
  describe_cmd->add_option("--columns", o.columns, "comma-separated subset of columns");

  auto* select_cmd = app.add_subcommand("select", "SULOV + boosted ranking sweep over the correlation threshold");
  common(select_cmd);
  select_cmd->add_option("--rho-grid", o.rho_grid, "start:stop:step");

  auto* bench_cmd = app.add_subcommand("bench", "Monte Carlo k-fold benchmark of the classifier zoo");
  common(bench_cmd);
  bench_cmd->add_option("--models", o.models, "comma-separated model kinds");
  bench_cmd->add_option("--k", o.k, "folds per repetition");
  bench_cmd->add_option("--repetitions", o.repetitions, "Monte Carlo repetitions");
  bench_cmd->add_option("--features", o.features, "comma-separated feature columns");
  bench_cmd->add_option("--selection", o.selection, "selection.json to take features from");

  auto* report_cmd = app.add_subcommand("report", "merge benchmark reports into one table");
  report_cmd->add_option("inputs", o.inputs, "bench_report.json files")->required();
  report_cmd->add_option("--out", o.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*describe_cmd) return cmd_describe(o);
    if (*select_cmd) return cmd_select(o);
    if (*bench_cmd) return cmd_bench(o);
    if (*report_cmd) return cmd_report(o);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 2;
}
