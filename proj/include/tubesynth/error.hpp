#pragma once

#include <stdexcept>
#include <string>

namespace tubesynth {

enum class ErrorKind {
  Parse,
  Validation,
  NoFragment,
  Structural,
  Parameter,
  OutOfDomain,
  UnrealizableTriplet,
  BlockedTask,
  InfeasiblePadding,
  SynthesisFailure,
  TubeViolation,
  FunnelViolation,
  Domain,
  Numeric,
  Config,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library.  The kind decides
/// the status code at the C boundary and the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace tubesynth
