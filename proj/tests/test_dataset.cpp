#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace prescreen;

namespace {

csv::Table table_from(const std::string& text) {
  std::istringstream in(text);
  return csv::parse(in);
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::InvalidConfig;
}

const char* kHeader = "Age,BMI,Glucose,Insulin,HOMA,Leptin,Adiponectin,Resistin,MCP.1,Classification\n";

RiskTable flat_table(RiskKind kind, double lo, double hi, double rr) {
  return RiskTable(kind, {{lo, hi, rr, rr, rr}});
}

}  // namespace

TEST(Homa, HandEvaluatedCases) {
  EXPECT_NEAR(compute_homa(10.0, 81.072), 10.0 * 81.072 / 405.36, 1e-12);
  EXPECT_NEAR(compute_homa(10.0, 81.072), 2.0, 1e-12);
  EXPECT_NEAR(compute_homa(3.7, 18.016 * 22.5), 3.7, 1e-12);
  EXPECT_NEAR(compute_homa(2.43, 60.0), 0.3597, 5e-5);
}

TEST(Homa, RejectsNonPositive) {
  EXPECT_EQ(kind_of([] { compute_homa(0.0, 90.0); }), ErrorKind::NonPositiveInput);
  EXPECT_EQ(kind_of([] { compute_homa(5.0, -1.0); }), ErrorKind::NonPositiveInput);
}

TEST(BmiFlags, Thresholds) {
  EXPECT_EQ(derive_bmi_flags(24.99).high_bmi, 0);
  EXPECT_EQ(derive_bmi_flags(24.99).obesity, 0);
  EXPECT_EQ(derive_bmi_flags(27.58).high_bmi, 1);
  EXPECT_EQ(derive_bmi_flags(27.58).obesity, 0);
  EXPECT_EQ(derive_bmi_flags(31.0).high_bmi, 1);
  EXPECT_EQ(derive_bmi_flags(31.0).obesity, 1);
  EXPECT_EQ(kind_of([] { derive_bmi_flags(0.0); }), ErrorKind::NonPositiveInput);
}

TEST(BmiFlags, ObesityImpliesHighBmi) {
  for (double bmi = 10.0; bmi <= 70.0; bmi += 0.01) {
    const auto f = derive_bmi_flags(bmi);
    if (f.obesity) EXPECT_EQ(f.high_bmi, 1) << bmi;
  }
}

TEST(LoadPatients, ParsesRowsAndLabels) {
  const auto t = table_from(std::string(kHeader) + "48,23.5,70,2.707,0.467409,8.8071,9.7024,7.99585,417.114,1\n"
                                                   "83,20.69,92,3.115,0.706897,8.8438,5.429285,4.06405,468.786,2\n");
  const auto recs = parse_patients(t, Schema{});
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].age, 48);
  EXPECT_EQ(recs[0].label, 0);
  EXPECT_EQ(recs[1].label, 1);
  EXPECT_DOUBLE_EQ(recs[1].mcp1, 468.786);
}

TEST(LoadPatients, DerivesHomaWhenColumnUnmapped) {
  const auto t = table_from("Age,BMI,Glucose,Insulin,Leptin,Adiponectin,Resistin,MCP.1,Classification\n"
                            "50,25,81.072,10,8,9,7,400,1\n");
  Schema s;
  s.homa.clear();
  const auto recs = parse_patients(t, s);
  EXPECT_NEAR(recs[0].homa, 2.0, 1e-12);
}

TEST(LoadPatients, HeaderOnlyIsEmptyFile) {
  EXPECT_EQ(kind_of([] { parse_patients(table_from(kHeader), Schema{}); }), ErrorKind::EmptyFile);
}

TEST(LoadPatients, NonNumericCellIsLocated) {
  try {
    parse_patients(table_from(std::string(kHeader) + "48,23.5,abc,2.7,0.46,8.8,9.7,7.9,417,1\n"), Schema{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonNumericCell);
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("Glucose"), std::string::npos);
  }
}

TEST(LoadPatients, MissingColumnIsNamed) {
  try {
    parse_patients(table_from("Age,BMI\n1,2\n"), Schema{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingColumn);
    EXPECT_NE(std::string(e.what()).find("Glucose"), std::string::npos);
  }
}

TEST(LoadPatients, RangeViolations) {
  EXPECT_EQ(kind_of([] {
              parse_patients(table_from(std::string(kHeader) + "12,23.5,70,2.7,0.46,8.8,9.7,7.9,417,1\n"), Schema{});
            }),
            ErrorKind::RangeViolation);
  EXPECT_EQ(kind_of([] {
              parse_patients(table_from(std::string(kHeader) + "40,23.5,70,2.7,0.46,8.8,9.7,7.9,417,3\n"), Schema{});
            }),
            ErrorKind::RangeViolation);
  EXPECT_EQ(kind_of([] {
              parse_patients(table_from(std::string(kHeader) + "40,23.5,70,2.7,0.46,-8.8,9.7,7.9,417,1\n"), Schema{});
            }),
            ErrorKind::RangeViolation);
}

TEST(LoadPatients, MissingFile) {
  EXPECT_EQ(kind_of([] { load_patients("/nonexistent/file.csv"); }), ErrorKind::FileNotFound);
}

TEST(RiskTable, ValidatesStructure) {
  EXPECT_EQ(kind_of([] { RiskTable(RiskKind::AgeBased, {{20, 30, 1, 1, 1}, {31, 40, 1, 1, 1}}); }),
            ErrorKind::InvalidTable);
  EXPECT_EQ(kind_of([] { RiskTable(RiskKind::AgeBased, {{20, 30, 1.0, 1.1, 1.2}}); }), ErrorKind::InvalidTable);
  EXPECT_EQ(kind_of([] { RiskTable(RiskKind::AgeBased, {}); }), ErrorKind::InvalidTable);
}

TEST(RiskTable, HalfOpenLookup) {
  RiskTable t(RiskKind::AgeBased, {{18, 50, 0.9, 0.8, 1.0}, {50, 121, 1.1, 1.0, 1.2}});
  EXPECT_EQ(t.lookup(18).rr_center, 0.9);
  EXPECT_EQ(t.lookup(49.999).rr_center, 0.9);
  EXPECT_EQ(t.lookup(50).rr_center, 1.1);
  EXPECT_EQ(kind_of([&] { t.lookup(121); }), ErrorKind::UncoveredRange);
  EXPECT_EQ(kind_of([&] { t.lookup(10); }), ErrorKind::UncoveredRange);
}

TEST(JoinRelativeRisks, ColumnsAndIdentityTable) {
  const auto recs = parse_patients(
      table_from(std::string(kHeader) + "57,31,70,2.7,0.46,8.8,9.7,7.9,417,1\n40,22,90,3,0.6,9,5,4,400,2\n"),
      Schema{});
  const auto age = load_risk_table(PRESCREEN_DATA_DIR "/rr_gbd_age.csv", RiskKind::AgeBased);
  const auto m = join_relative_risks(recs, age, flat_table(RiskKind::BmiBased, 10, 71, 1.0));
  EXPECT_EQ(m.names(), feature_columns());
  ASSERT_EQ(m.cols(), 15u);
  for (double v : m.column("RR_Liu")) EXPECT_EQ(v, 1.0);
  // Age 57 picks the [55, 60) row of the shipped table.
  const auto& row = age.lookup(57);
  EXPECT_EQ(row.range_low, 55);
  EXPECT_EQ(m.column("RR_GBD_center")[0], row.rr_center);
  EXPECT_EQ(m.column("RR_GBD_lower")[0], row.rr_lower);
  EXPECT_EQ(m.column("RR_GBD_upper")[0], row.rr_upper);
  EXPECT_EQ(m.column("HighBMI")[0], 1);
  EXPECT_EQ(m.column("Obesity")[0], 1);
  EXPECT_EQ(m.column("HighBMI")[1], 0);
  EXPECT_EQ(m.labels(), (std::vector<int>{0, 1}));
}

TEST(JoinRelativeRisks, MenopauseSplit) {
  const auto recs = parse_patients(
      table_from(std::string(kHeader) + "50,27,70,2.7,0.46,8.8,9.7,7.9,417,1\n51,27,90,3,0.6,9,5,4,400,2\n"),
      Schema{});
  BmiRiskTables bmi{flat_table(RiskKind::BmiBased, 10, 71, 0.7), flat_table(RiskKind::BmiBased, 10, 71, 1.8), 51};
  const auto m = join_relative_risks(recs, flat_table(RiskKind::AgeBased, 18, 121, 1.0), bmi);
  EXPECT_EQ(m.column("RR_Liu")[0], 0.7);
  EXPECT_EQ(m.column("RR_Liu")[1], 1.8);
}

TEST(JoinRelativeRisks, UncoveredAge) {
  PatientRecord r{150, 25, 90, 5, 1, 10, 10, 10, 400, 0};
  std::vector<PatientRecord> recs{r};
  EXPECT_EQ(kind_of([&] {
              join_relative_risks(recs, flat_table(RiskKind::AgeBased, 18, 121, 1.0),
                                  flat_table(RiskKind::BmiBased, 10, 71, 1.0));
            }),
            ErrorKind::UncoveredRange);
}

TEST(ShippedTables, LoadAndCoverDomain) {
  const auto age = load_risk_table(PRESCREEN_DATA_DIR "/rr_gbd_age.csv", RiskKind::AgeBased);
  EXPECT_LE(age.domain_low(), 18);
  EXPECT_GT(age.domain_high(), 120);
  for (const char* name : {"/rr_liu_bmi_premenopausal.csv", "/rr_liu_bmi_postmenopausal.csv"}) {
    const auto bmi = load_risk_table(std::string(PRESCREEN_DATA_DIR) + name, RiskKind::BmiBased);
    EXPECT_LE(bmi.domain_low(), 10);
    EXPECT_GT(bmi.domain_high(), 70);
  }
}

TEST(Describe, HandComputed) {
  const auto m = testsupport::make_matrix({"a", "c"}, {{1, 2, 3}, {4, 4, 4}}, {0, 1, 0});
  const auto d = describe(m);
  EXPECT_DOUBLE_EQ(d[0].mean, 2.0);
  EXPECT_DOUBLE_EQ(d[0].std, 1.0);
  EXPECT_EQ(d[0].min, 1.0);
  EXPECT_EQ(d[0].max, 3.0);
  EXPECT_EQ(d[1].std, 0.0);
  EXPECT_EQ(d[1].min, d[1].mean);
  EXPECT_EQ(d[1].max, d[1].mean);
  EXPECT_EQ(kind_of([] { describe(testsupport::make_matrix({"a"}, {{1}}, {0})); }), ErrorKind::TooFewRows);
}

TEST(FeatureMatrixCsv, RoundTripsBitForBit) {
  const auto m = testsupport::blobs(40, 3, 2, 1.0, 7);
  std::ostringstream out;
  write_matrix_csv(m, out);
  std::istringstream in(out.str());
  const auto back = parse_matrix_csv(csv::parse(in));
  EXPECT_EQ(back.names(), m.names());
  EXPECT_EQ(back.labels(), m.labels());
  EXPECT_TRUE(back.values() == m.values());
  EXPECT_NE(out.str().find("Classification"), std::string::npos);
}

TEST(FeatureMatrix, RejectsDuplicateNamesAndNonFinite) {
  EXPECT_THROW(testsupport::make_matrix({"a", "a"}, {{1, 2}, {3, 4}}, {0, 1}), Error);
  EXPECT_THROW(testsupport::make_matrix({"a"}, {{1, std::nan("")}}, {0, 1}), Error);
}

TEST(FeatureMatrix, SelectRowsAndColumns) {
  const auto m = testsupport::make_matrix({"a", "b"}, {{1, 2, 3}, {4, 5, 6}}, {0, 1, 1});
  const std::vector<std::size_t> rows{2, 0};
  const auto r = m.select_rows(rows);
  EXPECT_EQ(r.values()(0, 1), 6);
  EXPECT_EQ(r.labels(), (std::vector<int>{1, 0}));
  const auto c = m.select_columns({"b"});
  EXPECT_EQ(c.names(), std::vector<std::string>{"b"});
  EXPECT_EQ(c.values()(1, 0), 5);
}

TEST(DatasetHash, SensitiveToValues) {
  const auto a = testsupport::blobs(20, 2, 0, 1.0, 1);
  const auto b = testsupport::blobs(20, 2, 0, 1.0, 2);
  EXPECT_EQ(dataset_hash(a), dataset_hash(a));
  EXPECT_NE(dataset_hash(a), dataset_hash(b));
}
