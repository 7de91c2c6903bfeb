#pragma once

#include <stdexcept>
#include <string>

namespace coherence {

enum class ErrorCode {
  NonDiagonalizable,
  SingularMatrix,
  DimensionTooLarge,
  DimensionMismatch,
  Overflow,
  UnstableSystem,
  NotNormallyOrdered,
  TooManyEvents,
  UnsupportedAnomalousCoupling,
  ZeroDenominator,
  InvalidRankPermutation,
  UnsupportedDetectorCount,
  StringTooLong,
  CutoffTooSmall,
  NotConverged,
  UnsupportedSpec,
  InvalidArgument,
};

const char* to_string(ErrorCode code) noexcept;

/// Typed failure; what() is "<code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonDiagonalizable: return "NonDiagonalizable";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::UnstableSystem: return "UnstableSystem";
    case ErrorCode::NotNormallyOrdered: return "NotNormallyOrdered";
    case ErrorCode::TooManyEvents: return "TooManyEvents";
    case ErrorCode::UnsupportedAnomalousCoupling: return "UnsupportedAnomalousCoupling";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::InvalidRankPermutation: return "InvalidRankPermutation";
    case ErrorCode::UnsupportedDetectorCount: return "UnsupportedDetectorCount";
    case ErrorCode::StringTooLong: return "StringTooLong";
    case ErrorCode::CutoffTooSmall: return "CutoffTooSmall";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::UnsupportedSpec: return "UnsupportedSpec";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace coherence
