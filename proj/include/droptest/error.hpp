#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace droptest {

enum class ErrorKind {
  InvalidInput,
  DegenerateKinematics,
  SeveredSection,
  Parse,
  Sequencing,
  TooShort,
  NoImpact,
  Synchronization,
  StateCorruption,
  ProtocolViolation,
  MissingMeasurement,
  NotReady,
  NotFound,
  InfeasibleTarget,
  Stability,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::DegenerateKinematics: return "degenerate-kinematics";
    case ErrorKind::SeveredSection: return "severed-section";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Sequencing: return "sequencing";
    case ErrorKind::TooShort: return "too-short";
    case ErrorKind::NoImpact: return "no-impact-detected";
    case ErrorKind::Synchronization: return "synchronization";
    case ErrorKind::StateCorruption: return "state-corruption";
    case ErrorKind::ProtocolViolation: return "protocol-violation";
    case ErrorKind::MissingMeasurement: return "missing-measurement";
    case ErrorKind::NotReady: return "not-ready";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::InfeasibleTarget: return "infeasible-target";
    case ErrorKind::Stability: return "stability";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries a kind so callers (CLI exit
/// codes, HTTP status mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace droptest
