#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mpa {

enum class ErrorCode {
  // geometry
  DegeneratePoints,
  DimensionMismatch,
  ZeroVector,
  // training
  IdenticalMeans,
  MeanOnBoundary,
  SameSideMeans,
  ZeroDisplacement,
  NonBinaryLabels,
  EmptyModel,
  // data
  InvalidParams,
  FileNotFound,
  MissingColumn,
  NoRowsRemaining,
  SingleClass,
  EmptyDataset,
  InvalidK,
  DegenerateSplit,
  LengthMismatch,
  ParseError,
  RefuseNon2D,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegeneratePoints: return "DegeneratePoints";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::IdenticalMeans: return "IdenticalMeans";
    case ErrorCode::MeanOnBoundary: return "MeanOnBoundary";
    case ErrorCode::SameSideMeans: return "SameSideMeans";
    case ErrorCode::ZeroDisplacement: return "ZeroDisplacement";
    case ErrorCode::NonBinaryLabels: return "NonBinaryLabels";
    case ErrorCode::EmptyModel: return "EmptyModel";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NoRowsRemaining: return "NoRowsRemaining";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RefuseNon2D: return "RefuseNon2D";
  }
  return "Unknown";
}

/// Errors caused by the caller's data rather than by training dynamics.
/// The CLI maps these to exit code 2 and everything else to 3.
constexpr bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams:
    case ErrorCode::FileNotFound:
    case ErrorCode::MissingColumn:
    case ErrorCode::NoRowsRemaining:
    case ErrorCode::SingleClass:
    case ErrorCode::EmptyDataset:
    case ErrorCode::InvalidK:
    case ErrorCode::LengthMismatch:
    case ErrorCode::ParseError:
    case ErrorCode::NonBinaryLabels:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::RefuseNon2D:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mpa
