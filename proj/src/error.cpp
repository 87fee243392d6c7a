#include "polymrf/error.hpp"

namespace polymrf {

std::string_view to_string(ErrorCode code)
{
  switch (code) {
  case ErrorCode::IdenticallyZero: return "IdenticallyZero";
  case ErrorCode::RankDeficient: return "RankDeficient";
  case ErrorCode::InsufficientSamples: return "InsufficientSamples";
  case ErrorCode::LengthMismatch: return "LengthMismatch";
  case ErrorCode::DegreeTooSmall: return "DegreeTooSmall";
  case ErrorCode::EigenFailure: return "EigenFailure";
  case ErrorCode::ShapeMismatch: return "ShapeMismatch";
  case ErrorCode::ConfigMismatch: return "ConfigMismatch";
  case ErrorCode::StepSizeViolation: return "StepSizeViolation";
  case ErrorCode::Diverged: return "Diverged";
  case ErrorCode::InfeasibleDual: return "InfeasibleDual";
  case ErrorCode::DegenerateMass: return "DegenerateMass";
  case ErrorCode::NotAChain: return "NotAChain";
  case ErrorCode::ConfigParse: return "ConfigParse";
  case ErrorCode::Malformed: return "Malformed";
  case ErrorCode::IoFailure: return "IoFailure";
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
  : std::runtime_error(std::string(to_string(code)) + ": " + what)
  , code_(code)
{
}

void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace polymrf
