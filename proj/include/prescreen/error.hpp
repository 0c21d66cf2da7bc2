#pragma once

#include <stdexcept>
#include <string>

namespace prescreen {

enum class ErrorKind {
  MissingColumn,
  NonNumericCell,
  RangeViolation,
  EmptyFile,
  FileNotFound,
  NonPositiveInput,
  UncoveredRange,
  InvalidTable,
  TooFewRows,
  ConstantInput,
  LengthMismatch,
  SingleClass,
  TooFewSamples,
  DegenerateSplit,
  DimensionMismatch,
  ShapeMismatch,
  NonFiniteLoss,
  InvalidHyperparam,
  FeatureMismatch,
  InvalidPlan,
  DegenerateFold,
  EmptyReport,
  InvalidConfig,
  InvalidModelFile,
  MergeConflict,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::RangeViolation: return "RangeViolation";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::NonPositiveInput: return "NonPositiveInput";
    case ErrorKind::UncoveredRange: return "UncoveredRange";
    case ErrorKind::InvalidTable: return "InvalidTable";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::ConstantInput: return "ConstantInput";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::InvalidHyperparam: return "InvalidHyperparam";
    case ErrorKind::FeatureMismatch: return "FeatureMismatch";
    case ErrorKind::InvalidPlan: return "InvalidPlan";
    case ErrorKind::DegenerateFold: return "DegenerateFold";
    case ErrorKind::EmptyReport: return "EmptyReport";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidModelFile: return "InvalidModelFile";
    case ErrorKind::MergeConflict: return "MergeConflict";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (the CLI
/// in particular) can map it onto an exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace prescreen
