#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specnet {

enum class Errc {
  kInconsistentDistances,
  kOutsideTriangle,
  kInvalidWeights,
  kEmptyInput,
  kAllZero,
  kInvalidArgument,
  kRewardOutOfRange,
  kAggregationLimitExceeded,
  kZeroTime,
  kNegativeInterval,
  kZeroDenominator,
  kLengthMismatch,
  kZeroSymbolDuration,
  kInsufficientRuns,
  kInvalidTransition,
  kSessionGone,
  kParseError,
};

std::string_view to_string(Errc code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace specnet
