#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polymrf {

enum class ErrorCode {
  IdenticallyZero,
  RankDeficient,
  InsufficientSamples,
  LengthMismatch,
  DegreeTooSmall,
  EigenFailure,
  ShapeMismatch,
  ConfigMismatch,
  StepSizeViolation,
  Diverged,
  InfeasibleDual,
  DegenerateMass,
  NotAChain,
  ConfigParse,
  Malformed,
  IoFailure,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& what);

} // namespace polymrf
