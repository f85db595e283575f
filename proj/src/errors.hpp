#pragma once

#include <stdexcept>
#include <string>

namespace rbai {

// Machine-readable reason attached to every library error. The names match
// the failure modes documented on the individual operations.
enum class ErrorCode {
    NegativeEntry,
    RowSumViolation,
    NotErgodic,
    SingularSystem,
    SupportViolation,
    DomainError,
    TiedBestArm,
    IllegalAction,
    DelayOverflow,
    ImpossibleObservation,
    ZeroLikelihood,
    Infeasible,
    Unbounded,
    NumericalBreakdown,
    ZeroMarginal,
    ParseError,
    ValidationError,
    IoError,
    InvalidArgument,
    VerifyFailed,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace rbai
