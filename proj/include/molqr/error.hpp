#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace molqr {

enum class ErrorCode {
  kBadInput,
  kDimensionMismatch,
  kNonConvergence,
  kUnstable,
  kSingularInnerMatrix,
  kDiverging,
  kNotPositiveDefinite,
  kNotStabilizable,
  kInvalidWeight,
  kTooFine,
  kEmptyGrid,
  kUnstablePoint,
  kDegenerateB,
  kPerturbedUnstabilizable,
  kCannotStabilize,
  kRankDeficient,
  kNetMismatch,
  kParse,
};

std::string_view to_string(ErrorCode code);

/// Every library failure is reported through this exception; `code()` lets
/// callers branch without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace molqr
