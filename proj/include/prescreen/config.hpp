#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "prescreen/csv.hpp"
#include "prescreen/dataset.hpp"
#include "prescreen/error.hpp"
#include "prescreen/harness.hpp"
#include "prescreen/models/classifier.hpp"
#include "prescreen/select.hpp"

namespace prescreen::config {

namespace fs = std::filesystem;

/// Everything a CLI run needs. Serialized as an INI file; see README for the
/// section layout.
struct ExperimentConfig {
  fs::path dataset = "data/dataR2.csv";
  fs::path age_table = "data/rr_gbd_age.csv";
  fs::path bmi_table_premenopausal = "data/rr_liu_bmi_premenopausal.csv";
  fs::path bmi_table_postmenopausal = "data/rr_liu_bmi_postmenopausal.csv";  // empty: one table for all ages
  double menopause_age = 51.0;
  Schema schema;

  double rho_start = 0.01;
  double rho_stop = 0.99;
  double rho_step = 0.01;
  select::SweepConfig sweep = select::default_sweep_config();
  double min_frequency_fraction = 0.5;

  harness::CvPlan plan;
  std::vector<models::ModelKind> kinds{models::kAllKinds.begin(), models::kAllKinds.end()};
  std::vector<std::string> features;  // empty: take the selection output
  std::map<models::ModelKind, models::Hyperparams> hyperparams;

  std::uint64_t seed = 20180101;
  std::size_t workers = 0;  // 0: machine parallelism
  fs::path out = "results";
};

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto t = csv::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

inline std::vector<models::ModelKind> parse_kinds(const std::string& text) {
  std::vector<models::ModelKind> out;
  for (const auto& name : split_list(text)) {
    const auto kind = models::parse_model_kind(name);
    if (!kind) throw Error(ErrorKind::InvalidConfig, "unknown model '" + name + "'");
    if (std::find(out.begin(), out.end(), *kind) == out.end()) out.push_back(*kind);
  }
  if (out.empty()) throw Error(ErrorKind::InvalidConfig, "model list is empty");
  return out;
}

inline std::string kinds_to_string(const std::vector<models::ModelKind>& kinds) {
  std::vector<std::string> names;
  for (auto k : kinds) names.emplace_back(models::to_string(k));
  return join_list(names);
}

/// "start:stop:step"
inline void parse_rho_grid(const std::string& text, ExperimentConfig& cfg) {
  std::string commas = text;
  std::replace(commas.begin(), commas.end(), ':', ',');
  const auto parts = split_list(commas);
  if (parts.size() != 3) throw Error(ErrorKind::InvalidConfig, "rho grid must be start:stop:step, got '" + text + "'");
  double v[3];
  for (int i = 0; i < 3; ++i) {
    const auto d = csv::parse_double(parts[static_cast<std::size_t>(i)]);
    if (!d) throw Error(ErrorKind::InvalidConfig, "rho grid value '" + parts[static_cast<std::size_t>(i)] + "' is not numeric");
    v[i] = *d;
  }
  cfg.rho_start = v[0];
  cfg.rho_stop = v[1];
  cfg.rho_step = v[2];
  cfg.sweep.rho_grid = select::make_grid(v[0], v[1], v[2]);
}

namespace detail {

using boost::property_tree::ptree;

inline const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"data",
       {"dataset", "age_table", "bmi_table_premenopausal", "bmi_table_postmenopausal", "menopause_age"}},
      {"schema",
       {"age", "bmi", "glucose", "insulin", "homa", "leptin", "adiponectin", "resistin", "mcp1", "label",
        "healthy_code", "cancer_code"}},
      {"select",
       {"rho_grid", "mi_bins", "boosting_rounds", "tree_depth", "split_fraction", "rounds", "top_m",
        "min_frequency_fraction"}},
      {"bench", {"k", "repetitions", "stratified", "models", "features"}},
      {"run", {"seed", "workers", "out"}},
  };
  return keys;
}

template <class T>
T get(const ptree& section, const std::string& where, const std::string& key, T fallback) {
  const auto node = section.get_child_optional(key);
  if (!node) return fallback;
  const std::string text = node->get_value<std::string>();
  if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw Error(ErrorKind::InvalidConfig, where + "." + key + ": expected true/false, got '" + text + "'");
  } else {
    const auto d = csv::parse_double(text);
    if (!d) throw Error(ErrorKind::InvalidConfig, where + "." + key + ": expected a number, got '" + text + "'");
    if constexpr (std::is_integral_v<T>) {
      if (*d < 0 || *d != std::floor(*d))
        throw Error(ErrorKind::InvalidConfig, where + "." + key + ": expected a non-negative integer, got '" + text + "'");
      if constexpr (std::is_same_v<T, std::uint64_t>) return std::stoull(text);
      return static_cast<T>(*d);
    } else {
      return static_cast<T>(*d);
    }
  }
}

}  // namespace detail

/// Parses INI text. Unknown sections and keys are rejected so typos fail loudly.
inline ExperimentConfig parse(std::istream& in) {
  detail::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("config line ") + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (section.rfind("hyperparams.", 0) == 0) {
      const auto name = section.substr(std::string("hyperparams.").size());
      const auto kind = models::parse_model_kind(name);
      if (!kind) throw Error(ErrorKind::InvalidConfig, "unknown model section [" + section + "]");
      models::Hyperparams hp;
      for (const auto& [key, value] : body) hp[key] = detail::get<double>(body, section, key, 0.0);
      try {
        models::resolve_hyperparams(*kind, hp);
      } catch (const Error& e) {
        throw Error(ErrorKind::InvalidConfig, "[" + section + "] " + e.what());
      }
      cfg.hyperparams[*kind] = std::move(hp);
      continue;
    }
    const auto allowed = detail::allowed_keys().find(section);
    if (allowed == detail::allowed_keys().end())
      throw Error(ErrorKind::InvalidConfig, "unknown config section [" + section + "]");
    if (body.empty() && !body.data().empty())
      throw Error(ErrorKind::InvalidConfig, "top-level key '" + section + "' outside any section");
    for (const auto& [key, value] : body)
      if (!allowed->second.contains(key))
        throw Error(ErrorKind::InvalidConfig, "unknown key '" + key + "' in [" + section + "]");
  }

  const auto section = [&](const char* name) -> const detail::ptree& {
    static const detail::ptree empty;
    const auto child = tree.get_child_optional(name);
    return child ? *child : empty;
  };
  using detail::get;

  const auto& data = section("data");
  cfg.dataset = get<std::string>(data, "data", "dataset", cfg.dataset.string());
  cfg.age_table = get<std::string>(data, "data", "age_table", cfg.age_table.string());
  cfg.bmi_table_premenopausal =
      get<std::string>(data, "data", "bmi_table_premenopausal", cfg.bmi_table_premenopausal.string());
  cfg.bmi_table_postmenopausal =
      get<std::string>(data, "data", "bmi_table_postmenopausal", cfg.bmi_table_postmenopausal.string());
  cfg.menopause_age = get<double>(data, "data", "menopause_age", cfg.menopause_age);

  const auto& schema = section("schema");
  auto& s = cfg.schema;
  s.age = get<std::string>(schema, "schema", "age", s.age);
  s.bmi = get<std::string>(schema, "schema", "bmi", s.bmi);
  s.glucose = get<std::string>(schema, "schema", "glucose", s.glucose);
  s.insulin = get<std::string>(schema, "schema", "insulin", s.insulin);
  s.homa = get<std::string>(schema, "schema", "homa", s.homa);
  s.leptin = get<std::string>(schema, "schema", "leptin", s.leptin);
  s.adiponectin = get<std::string>(schema, "schema", "adiponectin", s.adiponectin);
  s.resistin = get<std::string>(schema, "schema", "resistin", s.resistin);
  s.mcp1 = get<std::string>(schema, "schema", "mcp1", s.mcp1);
  s.label = get<std::string>(schema, "schema", "label", s.label);
  s.healthy_code = static_cast<int>(get<double>(schema, "schema", "healthy_code", s.healthy_code));
  s.cancer_code = static_cast<int>(get<double>(schema, "schema", "cancer_code", s.cancer_code));

  const auto& sel = section("select");
  if (sel.get_child_optional("rho_grid")) parse_rho_grid(sel.get<std::string>("rho_grid"), cfg);
  cfg.sweep.mi_bins = get<std::size_t>(sel, "select", "mi_bins", cfg.sweep.mi_bins);
  cfg.sweep.boosting_rounds = get<std::size_t>(sel, "select", "boosting_rounds", cfg.sweep.boosting_rounds);
  cfg.sweep.tree_depth = get<std::size_t>(sel, "select", "tree_depth", cfg.sweep.tree_depth);
  cfg.sweep.split_fraction = get<double>(sel, "select", "split_fraction", cfg.sweep.split_fraction);
  cfg.sweep.rounds = get<std::size_t>(sel, "select", "rounds", cfg.sweep.rounds);
  cfg.sweep.top_m = get<std::size_t>(sel, "select", "top_m", cfg.sweep.top_m);
  cfg.min_frequency_fraction = get<double>(sel, "select", "min_frequency_fraction", cfg.min_frequency_fraction);

  const auto& bench = section("bench");
  cfg.plan.k = get<std::size_t>(bench, "bench", "k", cfg.plan.k);
  cfg.plan.repetitions = get<std::size_t>(bench, "bench", "repetitions", cfg.plan.repetitions);
  cfg.plan.stratified = get<bool>(bench, "bench", "stratified", cfg.plan.stratified);
  if (bench.get_child_optional("models")) cfg.kinds = parse_kinds(bench.get<std::string>("models"));
  if (bench.get_child_optional("features")) cfg.features = split_list(bench.get<std::string>("features"));

  const auto& run = section("run");
  cfg.seed = get<std::uint64_t>(run, "run", "seed", cfg.seed);
  cfg.workers = get<std::size_t>(run, "run", "workers", cfg.workers);
  cfg.out = get<std::string>(run, "run", "out", cfg.out.string());
  return cfg;
}

inline ExperimentConfig load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::FileNotFound, "cannot open config " + path.string());
  return parse(in);
}

inline void write(const ExperimentConfig& cfg, std::ostream& out) {
  const auto num = [](double v) { return csv::format_double(v); };
  out << "[data]\n"
      << "dataset = " << cfg.dataset.string() << '\n'
      << "age_table = " << cfg.age_table.string() << '\n'
      << "bmi_table_premenopausal = " << cfg.bmi_table_premenopausal.string() << '\n'
      << "bmi_table_postmenopausal = " << cfg.bmi_table_postmenopausal.string() << '\n'
      << "menopause_age = " << num(cfg.menopause_age) << "\n\n";
  const auto& s = cfg.schema;
  out << "[schema]\n"
      << "age = " << s.age << "\nbmi = " << s.bmi << "\nglucose = " << s.glucose << "\ninsulin = " << s.insulin
      << "\nhoma = " << s.homa << "\nleptin = " << s.leptin << "\nadiponectin = " << s.adiponectin
      << "\nresistin = " << s.resistin << "\nmcp1 = " << s.mcp1 << "\nlabel = " << s.label
      << "\nhealthy_code = " << s.healthy_code << "\ncancer_code = " << s.cancer_code << "\n\n";
  out << "[select]\n"
      << "rho_grid = " << num(cfg.rho_start) << ':' << num(cfg.rho_stop) << ':' << num(cfg.rho_step) << '\n'
      << "mi_bins = " << cfg.sweep.mi_bins << '\n'
      << "boosting_rounds = " << cfg.sweep.boosting_rounds << '\n'
      << "tree_depth = " << cfg.sweep.tree_depth << '\n'
      << "split_fraction = " << num(cfg.sweep.split_fraction) << '\n'
      << "rounds = " << cfg.sweep.rounds << '\n'
      << "top_m = " << cfg.sweep.top_m << '\n'
      << "min_frequency_fraction = " << num(cfg.min_frequency_fraction) << "\n\n";
  out << "[bench]\n"
      << "k = " << cfg.plan.k << '\n'
      << "repetitions = " << cfg.plan.repetitions << '\n'
      << "stratified = " << (cfg.plan.stratified ? "true" : "false") << '\n'
      << "models = " << kinds_to_string(cfg.kinds) << '\n'
      << "features = " << join_list(cfg.features) << "\n\n";
  out << "[run]\n"
      << "seed = " << cfg.seed << '\n'
      << "workers = " << cfg.workers << '\n'
      << "out = " << cfg.out.string() << '\n';
  for (const auto& [kind, hp] : cfg.hyperparams) {
    out << "\n[hyperparams." << models::to_string(kind) << "]\n";
    for (const auto& [key, value] : hp) out << key << " = " << num(value) << '\n';
  }
}

inline std::string to_string(const ExperimentConfig& cfg) {
  std::ostringstream out;
  write(cfg, out);
  return out.str();
}

/// Path existence and value ranges; run after CLI overrides are applied.
inline void validate(const ExperimentConfig& cfg, bool need_tables = true) {
  auto require_file = [](const fs::path& p, const char* what) {
    if (!fs::exists(p)) throw Error(ErrorKind::FileNotFound, std::string(what) + " not found: " + p.string());
  };
  require_file(cfg.dataset, "dataset");
  if (need_tables) {
    require_file(cfg.age_table, "age table");
    require_file(cfg.bmi_table_premenopausal, "BMI table");
    if (!cfg.bmi_table_postmenopausal.empty()) require_file(cfg.bmi_table_postmenopausal, "postmenopausal BMI table");
  }
  select::validate(cfg.sweep);
  if (!(cfg.min_frequency_fraction >= 0.0 && cfg.min_frequency_fraction <= 1.0))
    throw Error(ErrorKind::InvalidConfig, "min_frequency_fraction must lie in [0, 1]");
  if (cfg.plan.k < 2 || cfg.plan.repetitions < 1)
    throw Error(ErrorKind::InvalidConfig, "bench needs k >= 2 and repetitions >= 1");
}

}  // namespace prescreen::config
