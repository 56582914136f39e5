#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace switchsim {

enum class ErrorCode {
  InvalidInput,
  NoEngagement,
  TrackDegenerate,
  InvalidState,
  SubKinematicRatio,
  RangeExceeded,
  SlackDetected,
  OutOfRange,
  ScriptError,
  NeverEngaged,
  BelowKinematicFloor,
  InvalidDesign,
  SpaceTooLarge,
  EmptyFeasibleSet,
  ConfigError,
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NoEngagement: return "NoEngagement";
    case ErrorCode::TrackDegenerate: return "TrackDegenerate";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::SubKinematicRatio: return "SubKinematicRatio";
    case ErrorCode::RangeExceeded: return "RangeExceeded";
    case ErrorCode::SlackDetected: return "SlackDetected";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ScriptError: return "ScriptError";
    case ErrorCode::NeverEngaged: return "NeverEngaged";
    case ErrorCode::BelowKinematicFloor: return "BelowKinematicFloor";
    case ErrorCode::InvalidDesign: return "InvalidDesign";
    case ErrorCode::SpaceTooLarge: return "SpaceTooLarge";
    case ErrorCode::EmptyFeasibleSet: return "EmptyFeasibleSet";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define SWITCHSIM_REQUIRE(cond, code, msg)            \
  do {                                                \
    if (!(cond)) throw ::switchsim::Error((code), (msg)); \
  } while (0)

}  // namespace switchsim
