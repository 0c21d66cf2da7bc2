#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "prescreen/csv.hpp"
#include "prescreen/error.hpp"

namespace prescreen {

// ---------------------------------------------------------------------------
// Patient records

/// One woman's measurements. label: 0 = healthy, 1 = cancer.
struct PatientRecord {
  int age = 0;
  double bmi = 0.0;          // kg/m^2
  double glucose = 0.0;      // mg/dL
  double insulin = 0.0;      // uU/mL
  double homa = 0.0;         // dimensionless
  double leptin = 0.0;       // ng/mL
  double adiponectin = 0.0;  // ug/mL
  double resistin = 0.0;     // ng/mL
  double mcp1 = 0.0;         // pg/dL
  int label = 0;
};

/// Maps record fields onto CSV header names. Defaults follow the public
/// Coimbra file. An empty `homa` column means HOMA is derived from insulin
/// and glucose instead of read.
struct Schema {
  std::string age = "Age";
  std::string bmi = "BMI";
  std::string glucose = "Glucose";
  std::string insulin = "Insulin";
  std::string homa = "HOMA";
  std::string leptin = "Leptin";
  std::string adiponectin = "Adiponectin";
  std::string resistin = "Resistin";
  std::string mcp1 = "MCP.1";
  std::string label = "Classification";
  int healthy_code = 1;
  int cancer_code = 2;
};

/// Glucose mg/dL -> mmol/L conversion factor times the HOMA-IR constant 22.5.
inline constexpr double kHomaDivisor = 18.016 * 22.5;  // 405.36

inline double compute_homa(double insulin, double glucose) {
  if (!(insulin > 0.0) || !(glucose > 0.0) || !std::isfinite(insulin) || !std::isfinite(glucose))
    throw Error(ErrorKind::NonPositiveInput, "HOMA needs positive insulin and glucose");
  return insulin * (glucose / 18.016) / 22.5;
}

struct BmiFlags {
  int high_bmi = 0;
  int obesity = 0;
};

inline constexpr double kHighBmiThreshold = 25.0;
inline constexpr double kObesityThreshold = 30.0;

inline BmiFlags derive_bmi_flags(double bmi) {
  if (!(bmi > 0.0)) throw Error(ErrorKind::NonPositiveInput, "BMI must be positive");
  return {bmi >= kHighBmiThreshold ? 1 : 0, bmi >= kObesityThreshold ? 1 : 0};
}

namespace detail {

inline void require_positive(double value, const char* field, std::size_t row) {
  if (!std::isfinite(value) || value <= 0.0)
    throw Error(ErrorKind::RangeViolation,
                "row " + std::to_string(row) + ": " + field + " must be finite and > 0");
}

}  // namespace detail

/// Checks the record invariants; `row` is the 1-based data row used in messages.
inline void validate(const PatientRecord& r, std::size_t row) {
  if (r.age < 18 || r.age > 120)
    throw Error(ErrorKind::RangeViolation, "row " + std::to_string(row) + ": age outside [18, 120]");
  if (!std::isfinite(r.bmi) || r.bmi < 10.0 || r.bmi > 70.0)
    throw Error(ErrorKind::RangeViolation, "row " + std::to_string(row) + ": BMI outside [10, 70]");
  detail::require_positive(r.glucose, "glucose", row);
  detail::require_positive(r.insulin, "insulin", row);
  detail::require_positive(r.homa, "HOMA", row);
  detail::require_positive(r.leptin, "leptin", row);
  detail::require_positive(r.adiponectin, "adiponectin", row);
  detail::require_positive(r.resistin, "resistin", row);
  detail::require_positive(r.mcp1, "MCP-1", row);
  if (r.label != 0 && r.label != 1)
    throw Error(ErrorKind::RangeViolation, "row " + std::to_string(row) + ": label must be 0 or 1");
}

inline std::vector<PatientRecord> parse_patients(const csv::Table& table, const Schema& schema) {
  auto locate = [&](const std::string& name) {
    auto idx = table.column_index(name);
    if (!idx) throw Error(ErrorKind::MissingColumn, "column '" + name + "' not found in header");
    return *idx;
  };
  const std::size_t c_age = locate(schema.age), c_bmi = locate(schema.bmi), c_glu = locate(schema.glucose),
                    c_ins = locate(schema.insulin), c_lep = locate(schema.leptin),
                    c_adi = locate(schema.adiponectin), c_res = locate(schema.resistin),
                    c_mcp = locate(schema.mcp1), c_lab = locate(schema.label);
  const std::optional<std::size_t> c_homa =
      schema.homa.empty() ? std::nullopt : std::optional<std::size_t>(locate(schema.homa));

  if (table.rows.empty()) throw Error(ErrorKind::EmptyFile, "no data rows after the header");

  std::vector<PatientRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    const std::size_t row = r + 1;
    auto num = [&](std::size_t col) {
      if (col >= cells.size())
        throw Error(ErrorKind::NonNumericCell,
                    "row " + std::to_string(row) + ", column '" + table.header[col] + "': missing cell");
      auto v = csv::parse_double(cells[col]);
      if (!v)
        throw Error(ErrorKind::NonNumericCell, "row " + std::to_string(row) + ", column '" + table.header[col] +
                                                   "': '" + cells[col] + "' is not a number");
      return *v;
    };
    PatientRecord rec;
    const double age = num(c_age);
    if (age != std::floor(age) || age < 0.0 || age > 1000.0)
      throw Error(ErrorKind::RangeViolation, "row " + std::to_string(row) + ": age must be a whole number of years");
    rec.age = static_cast<int>(age);
    rec.bmi = num(c_bmi);
    rec.glucose = num(c_glu);
    rec.insulin = num(c_ins);
    rec.leptin = num(c_lep);
    rec.adiponectin = num(c_adi);
    rec.resistin = num(c_res);
    rec.mcp1 = num(c_mcp);
    const double code = num(c_lab);
    if (code == schema.healthy_code) {
      rec.label = 0;
    } else if (code == schema.cancer_code) {
      rec.label = 1;
    } else {
      throw Error(ErrorKind::RangeViolation, "row " + std::to_string(row) + ": class code '" + cells[c_lab] +
                                                 "' is neither healthy nor cancer");
    }
    if (c_homa) {
      rec.homa = num(*c_homa);
    } else {
      detail::require_positive(rec.glucose, "glucose", row);
      detail::require_positive(rec.insulin, "insulin", row);
      rec.homa = compute_homa(rec.insulin, rec.glucose);
    }
    validate(rec, row);
    records.push_back(rec);
  }
  return records;
}

inline std::vector<PatientRecord> load_patients(const std::filesystem::path& path, const Schema& schema = {}) {
  return parse_patients(csv::read_file(path), schema);
}

// ---------------------------------------------------------------------------
// Relative-risk lookup tables

enum class RiskKind { AgeBased, BmiBased };

struct RiskRow {
  double range_low = 0.0;   // inclusive
  double range_high = 0.0;  // exclusive
  double rr_center = 1.0;
  double rr_lower = 1.0;
  double rr_upper = 1.0;
};

class RiskTable {
 public:
  RiskTable() = default;
  RiskTable(RiskKind kind, std::vector<RiskRow> rows) : kind_(kind), rows_(std::move(rows)) { check(); }

  RiskKind kind() const noexcept { return kind_; }
  std::span<const RiskRow> rows() const noexcept { return rows_; }
  double domain_low() const { return rows_.front().range_low; }
  double domain_high() const { return rows_.back().range_high; }

  const RiskRow& lookup(double value) const {
    auto it = std::upper_bound(rows_.begin(), rows_.end(), value,
                               [](double v, const RiskRow& r) { return v < r.range_low; });
    if (it == rows_.begin() || value >= std::prev(it)->range_high || !std::isfinite(value)) {
      std::ostringstream msg;
      msg << (kind_ == RiskKind::AgeBased ? "age " : "BMI ") << value << " outside table domain [" << domain_low()
          << ", " << domain_high() << ")";
      throw Error(ErrorKind::UncoveredRange, msg.str());
    }
    return *std::prev(it);
  }

 private:
  void check() const {
    if (rows_.empty()) throw Error(ErrorKind::InvalidTable, "risk table has no rows");
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto& r = rows_[i];
      if (!(r.range_low < r.range_high))
        throw Error(ErrorKind::InvalidTable, "row " + std::to_string(i + 1) + ": range_low must be < range_high");
      if (!(r.rr_lower > 0.0) || !(r.rr_lower <= r.rr_center) || !(r.rr_center <= r.rr_upper) ||
          !std::isfinite(r.rr_upper))
        throw Error(ErrorKind::InvalidTable,
                    "row " + std::to_string(i + 1) + ": need 0 < rr_lower <= rr_center <= rr_upper");
      if (i > 0 && rows_[i - 1].range_high != r.range_low)
        throw Error(ErrorKind::InvalidTable,
                    "row " + std::to_string(i + 1) + ": ranges must be sorted and contiguous");
    }
  }

  RiskKind kind_ = RiskKind::AgeBased;
  std::vector<RiskRow> rows_;
};

inline RiskTable parse_risk_table(const csv::Table& table, RiskKind kind) {
  static constexpr std::array<const char*, 5> kColumns = {"range_low", "range_high", "rr_center", "rr_lower",
                                                         "rr_upper"};
  std::array<std::size_t, 5> idx{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    auto i = table.column_index(kColumns[c]);
    if (!i) throw Error(ErrorKind::MissingColumn, std::string("risk table lacks column '") + kColumns[c] + "'");
    idx[c] = *i;
  }
  if (table.rows.empty()) throw Error(ErrorKind::EmptyFile, "risk table has no rows");
  std::vector<RiskRow> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::array<double, 5> v{};
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
      auto parsed = idx[c] < table.rows[r].size() ? csv::parse_double(table.rows[r][idx[c]]) : std::nullopt;
      if (!parsed)
        throw Error(ErrorKind::NonNumericCell,
                    "risk table row " + std::to_string(r + 1) + ", column '" + kColumns[c] + "'");
      v[c] = *parsed;
    }
    rows.push_back({v[0], v[1], v[2], v[3], v[4]});
  }
  return RiskTable(kind, std::move(rows));
}

inline RiskTable load_risk_table(const std::filesystem::path& path, RiskKind kind) {
  return parse_risk_table(csv::read_file(path), kind);
}

/// BMI relative risks, optionally split by menopausal status. The dataset has
/// no menopause column, so status is approximated by an age cutoff: ages below
/// `menopause_age` use `premenopausal`, the rest `postmenopausal` (when set).
struct BmiRiskTables {
  RiskTable premenopausal;
  std::optional<RiskTable> postmenopausal;
  double menopause_age = 51.0;

  const RiskTable& for_age(int age) const {
    return postmenopausal && age >= menopause_age ? *postmenopausal : premenopausal;
  }
};

// ---------------------------------------------------------------------------
// Feature matrix

class FeatureMatrix {
 public:
  FeatureMatrix() = default;

  FeatureMatrix(std::vector<std::string> names, Eigen::MatrixXd values, std::vector<int> labels)
      : names_(std::move(names)), values_(std::move(values)), labels_(std::move(labels)) {
    if (static_cast<std::size_t>(values_.cols()) != names_.size())
      throw Error(ErrorKind::DimensionMismatch, "column name count differs from matrix width");
    if (static_cast<std::size_t>(values_.rows()) != labels_.size())
      throw Error(ErrorKind::DimensionMismatch, "label count differs from matrix height");
    std::unordered_set<std::string> seen;
    for (const auto& n : names_)
      if (!seen.insert(n).second) throw Error(ErrorKind::InvalidTable, "duplicate column name '" + n + "'");
    if (!values_.allFinite()) throw Error(ErrorKind::RangeViolation, "feature matrix contains non-finite values");
    for (int y : labels_)
      if (y != 0 && y != 1) throw Error(ErrorKind::RangeViolation, "labels must be 0 or 1");
  }

  std::size_t rows() const noexcept { return labels_.size(); }
  std::size_t cols() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  std::size_t positives() const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
  }

  std::optional<std::size_t> index_of(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
  }

  Eigen::VectorXd column(const std::string& name) const {
    auto idx = index_of(name);
    if (!idx) throw Error(ErrorKind::MissingColumn, "no column '" + name + "'");
    return values_.col(static_cast<Eigen::Index>(*idx));
  }

  /// New matrix holding `columns` in the given order.
  FeatureMatrix select_columns(const std::vector<std::string>& columns) const {
    Eigen::MatrixXd out(values_.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
      auto idx = index_of(columns[c]);
      if (!idx) throw Error(ErrorKind::MissingColumn, "no column '" + columns[c] + "'");
      out.col(static_cast<Eigen::Index>(c)) = values_.col(static_cast<Eigen::Index>(*idx));
    }
    return FeatureMatrix(columns, std::move(out), labels_);
  }

  FeatureMatrix select_rows(std::span<const std::size_t> row_indices) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(row_indices.size()), values_.cols());
    std::vector<int> labels(row_indices.size());
    for (std::size_t r = 0; r < row_indices.size(); ++r) {
      out.row(static_cast<Eigen::Index>(r)) = values_.row(static_cast<Eigen::Index>(row_indices[r]));
      labels[r] = labels_.at(row_indices[r]);
    }
    return FeatureMatrix(names_, std::move(out), std::move(labels));
  }

 private:
  std::vector<std::string> names_;
  Eigen::MatrixXd values_;
  std::vector<int> labels_;
};

/// Candidate predictor set, in output order.
inline const std::vector<std::string>& feature_columns() {
  static const std::vector<std::string> kColumns = {
      "Age",      "BMI",    "Glucose",       "Insulin",       "HOMA",         "Leptin",  "Adiponectin", "Resistin",
      "MCP-1",    "RR_Liu", "RR_GBD_center", "RR_GBD_lower",  "RR_GBD_upper", "HighBMI", "Obesity"};
  return kColumns;
}

/// The nine measured columns only, before any relative-risk join.
inline FeatureMatrix measured_matrix(std::span<const PatientRecord> records) {
  const auto& all = feature_columns();
  std::vector<std::string> names(all.begin(), all.begin() + 9);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(records.size()), 9);
  std::vector<int> labels(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    values.row(static_cast<Eigen::Index>(i)) << r.age, r.bmi, r.glucose, r.insulin, r.homa, r.leptin, r.adiponectin,
        r.resistin, r.mcp1;
    labels[i] = r.label;
  }
  return FeatureMatrix(std::move(names), std::move(values), std::move(labels));
}

inline FeatureMatrix join_relative_risks(std::span<const PatientRecord> records, const RiskTable& age_table,
                                         const BmiRiskTables& bmi_tables) {
  const auto& names = feature_columns();
  Eigen::MatrixXd values(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(names.size()));
  std::vector<int> labels(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const RiskRow& gbd = age_table.lookup(r.age);
    const RiskRow& liu = bmi_tables.for_age(r.age).lookup(r.bmi);
    const BmiFlags flags = derive_bmi_flags(r.bmi);
    const auto row = static_cast<Eigen::Index>(i);
    values.row(row) << r.age, r.bmi, r.glucose, r.insulin, r.homa, r.leptin, r.adiponectin, r.resistin, r.mcp1,
        liu.rr_center, gbd.rr_center, gbd.rr_lower, gbd.rr_upper, flags.high_bmi, flags.obesity;
    labels[i] = r.label;
  }
  return FeatureMatrix(names, std::move(values), std::move(labels));
}

inline FeatureMatrix join_relative_risks(std::span<const PatientRecord> records, const RiskTable& age_table,
                                         const RiskTable& bmi_table) {
  return join_relative_risks(records, age_table, BmiRiskTables{bmi_table, std::nullopt, 51.0});
}

// ---------------------------------------------------------------------------
// Descriptive statistics

struct ColumnSummary {
  std::string name;
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1)
  double min = 0.0;
  double max = 0.0;
};

inline std::vector<ColumnSummary> describe(const FeatureMatrix& matrix) {
  const std::size_t n = matrix.rows();
  if (n < 2) throw Error(ErrorKind::TooFewRows, "describe needs at least 2 rows");
  std::vector<ColumnSummary> out;
  out.reserve(matrix.cols());
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    const auto col = matrix.values().col(static_cast<Eigen::Index>(c));
    ColumnSummary s;
    s.name = matrix.names()[c];
    s.mean = col.mean();
    double ss = 0.0;
    for (Eigen::Index i = 0; i < col.size(); ++i) ss += (col[i] - s.mean) * (col[i] - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(n - 1));
    s.min = col.minCoeff();
    s.max = col.maxCoeff();
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// FeatureMatrix CSV: feature columns then `Classification` (1 healthy, 2 cancer).

inline constexpr const char* kLabelColumn = "Classification";

inline void write_matrix_csv(const FeatureMatrix& m, std::ostream& out) {
  for (const auto& n : m.names()) out << n << ',';
  out << kLabelColumn << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c)
      out << csv::format_double(m.values()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))) << ',';
    out << (m.labels()[r] == 1 ? 2 : 1) << '\n';
  }
}

inline FeatureMatrix parse_matrix_csv(const csv::Table& table) {
  auto label_idx = table.column_index(kLabelColumn);
  if (!label_idx) throw Error(ErrorKind::MissingColumn, std::string("column '") + kLabelColumn + "' not found");
  if (table.rows.empty()) throw Error(ErrorKind::EmptyFile, "no data rows after the header");
  std::vector<std::string> names;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (c != *label_idx) names.push_back(table.header[c]);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(names.size()));
  std::vector<int> labels(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    if (cells.size() != table.header.size())
      throw Error(ErrorKind::NonNumericCell, "row " + std::to_string(r + 1) + ": wrong number of cells");
    Eigen::Index out_c = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      auto v = csv::parse_double(cells[c]);
      if (!v)
        throw Error(ErrorKind::NonNumericCell,
                    "row " + std::to_string(r + 1) + ", column '" + table.header[c] + "': '" + cells[c] + "'");
      if (c == *label_idx) {
        if (*v != 1.0 && *v != 2.0)
          throw Error(ErrorKind::RangeViolation, "row " + std::to_string(r + 1) + ": Classification must be 1 or 2");
        labels[r] = *v == 2.0 ? 1 : 0;
      } else {
        values(static_cast<Eigen::Index>(r), out_c++) = *v;
      }
    }
  }
  return FeatureMatrix(std::move(names), std::move(values), std::move(labels));
}

inline FeatureMatrix read_matrix_csv(const std::filesystem::path& path) {
  return parse_matrix_csv(csv::read_file(path));
}

/// FNV-1a over the CSV serialization; identifies a dataset across reports.
inline std::uint64_t dataset_hash(const FeatureMatrix& m) {
  std::ostringstream out;
  write_matrix_csv(m, out);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : out.str()) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace prescreen
