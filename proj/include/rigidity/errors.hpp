#pragma once

#include <stdexcept>
#include <string>

namespace rigidity {

/// Failure categories raised by the library. Scientific negative results
/// (non-mixing shifts, obstructions, infeasible tunings) are returned as
/// values instead.
enum class ErrorCode {
  InvalidArgument,
  InvalidSft,
  InvalidWord,
  MismatchedCylinder,
  NoPath,
  NotMixing,
  InvalidMeasure,
  InvalidGenerator,
  NegativeDeterminant,
  NotPeriodic,
  InvalidStructure,
  NotElliptic,
  NoConvergence,
  NotOnStableSet,
  NotOnUnstableSet,
  NoCertificate,
  MissingAnchor,
  InvalidConnector,
  PeriodMismatch,
  ShadowingHypothesisFails,
  ShadowBoundExceeded,
  DimensionTooLarge,
  ParseError,
  Internal,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "core.InvalidArgument";
    case ErrorCode::InvalidSft: return "sft.InvalidSft";
    case ErrorCode::InvalidWord: return "sft.InvalidWord";
    case ErrorCode::MismatchedCylinder: return "sft.MismatchedCylinder";
    case ErrorCode::NoPath: return "sft.NoPath";
    case ErrorCode::NotMixing: return "markov.NotMixing";
    case ErrorCode::InvalidMeasure: return "markov.InvalidMeasure";
    case ErrorCode::InvalidGenerator: return "cocycle.InvalidGenerator";
    case ErrorCode::NegativeDeterminant: return "cocycle.NegativeDeterminant";
    case ErrorCode::NotPeriodic: return "cocycle.NotPeriodic";
    case ErrorCode::InvalidStructure: return "conformal.InvalidStructure";
    case ErrorCode::NotElliptic: return "conformal.NotElliptic";
    case ErrorCode::NoConvergence: return "conformal.NoConvergence";
    case ErrorCode::NotOnStableSet: return "holonomy.NotOnStableSet";
    case ErrorCode::NotOnUnstableSet: return "holonomy.NotOnUnstableSet";
    case ErrorCode::NoCertificate: return "holonomy.NoCertificate";
    case ErrorCode::MissingAnchor: return "holonomy.MissingAnchor";
    case ErrorCode::InvalidConnector: return "shadowing.InvalidConnector";
    case ErrorCode::PeriodMismatch: return "shadowing.PeriodMismatch";
    case ErrorCode::ShadowingHypothesisFails: return "shadowing.ShadowingHypothesisFails";
    case ErrorCode::ShadowBoundExceeded: return "shadowing.ShadowBoundExceeded";
    case ErrorCode::DimensionTooLarge: return "analysis.DimensionTooLarge";
    case ErrorCode::ParseError: return "cli.ParseError";
    case ErrorCode::Internal: return "core.Internal";
  }
  return "core.Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace rigidity
