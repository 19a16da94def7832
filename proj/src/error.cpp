#include "specnet/error.hpp"

namespace specnet {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kInconsistentDistances: return "InconsistentDistances";
    case Errc::kOutsideTriangle: return "OutsideTriangle";
    case Errc::kInvalidWeights: return "InvalidWeights";
    case Errc::kEmptyInput: return "EmptyInput";
    case Errc::kAllZero: return "AllZero";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kRewardOutOfRange: return "RewardOutOfRange";
    case Errc::kAggregationLimitExceeded: return "AggregationLimitExceeded";
    case Errc::kZeroTime: return "ZeroTime";
    case Errc::kNegativeInterval: return "NegativeInterval";
    case Errc::kZeroDenominator: return "ZeroDenominator";
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kZeroSymbolDuration: return "ZeroSymbolDuration";
    case Errc::kInsufficientRuns: return "InsufficientRuns";
    case Errc::kInvalidTransition: return "InvalidTransition";
    case Errc::kSessionGone: return "SessionGone";
    case Errc::kParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace specnet
