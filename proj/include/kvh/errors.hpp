#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kvh {

enum class ErrorCode {
  EnergyBelowWell,
  EnergyAboveWell,
  ActionOutOfRange,
  StepFailure,
  OutsideAllowedRegion,
  InsideAllowedRegion,
  RegionMismatch,
  OutOfDomain,
  CausticUnresolved,
  CausticReached,
  BoundaryLeak,
  AxisMismatch,
  ExponentSumInvalid,
  InvalidArgument,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EnergyBelowWell: return "EnergyBelowWell";
    case ErrorCode::EnergyAboveWell: return "EnergyAboveWell";
    case ErrorCode::ActionOutOfRange: return "ActionOutOfRange";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::OutsideAllowedRegion: return "OutsideAllowedRegion";
    case ErrorCode::InsideAllowedRegion: return "InsideAllowedRegion";
    case ErrorCode::RegionMismatch: return "RegionMismatch";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::CausticUnresolved: return "CausticUnresolved";
    case ErrorCode::CausticReached: return "CausticReached";
    case ErrorCode::BoundaryLeak: return "BoundaryLeak";
    case ErrorCode::AxisMismatch: return "AxisMismatch";
    case ErrorCode::ExponentSumInvalid: return "ExponentSumInvalid";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when a characteristic reaches a caustic; `time()` is the crossing time.
class CausticError : public Error {
 public:
  CausticError(ErrorCode code, const std::string& what, double time)
      : Error(code, what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Raised by the integrator; `last_time()` is the last successfully reached time.
class StepFailureError : public Error {
 public:
  StepFailureError(const std::string& what, double last_time)
      : Error(ErrorCode::StepFailure, what), last_time_(last_time) {}
  double last_time() const noexcept { return last_time_; }

 private:
  double last_time_;
};

}  // namespace kvh
