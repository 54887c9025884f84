#pragma once

#include <stdexcept>
#include <string>

namespace rwot {

enum class ErrorCode {
  kDomainViolation = 1,
  kRangeViolation,
  kUnbalanced,
  kTooLarge,
  kParseError,
  kWeightError,
  kTieDetected,
  kNonFinite,
  kBudgetExceeded,
  kInvalidArgument,
  kIoError,
};

const char* error_code_name(ErrorCode code);

// All library failures surface as this exception; the code selects the
// C API status and the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace rwot
