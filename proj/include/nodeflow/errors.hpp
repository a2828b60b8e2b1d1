#ifndef NODEFLOW_ERRORS_HPP
#define NODEFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace nodeflow {

enum class ErrorCode {
  DimensionMismatch,
  EmptyLayer,
  TooFewLayers,
  BadRange,
  RateCountMismatch,
  NegativeRate,
  OutOfRange,
  NonNormalizedPMF,
  InvalidOracle,
  UnsupportedModel,
  TooLarge,
  Infeasible,
  InfeasibleBoundary,
  NumericalFailure,
  NotUnicast,
  ParseError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyLayer: return "EmptyLayer";
    case ErrorCode::TooFewLayers: return "TooFewLayers";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::RateCountMismatch: return "RateCountMismatch";
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NonNormalizedPMF: return "NonNormalizedPMF";
    case ErrorCode::InvalidOracle: return "InvalidOracle";
    case ErrorCode::UnsupportedModel: return "UnsupportedModel";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::InfeasibleBoundary: return "InfeasibleBoundary";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::NotUnicast: return "NotUnicast";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace nodeflow

#endif  // NODEFLOW_ERRORS_HPP
