#include "tubesynth/error.hpp"

namespace tubesynth {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::NoFragment: return "no accepting fragment";
    case ErrorKind::Structural: return "structural error";
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::OutOfDomain: return "out of domain";
    case ErrorKind::UnrealizableTriplet: return "unrealizable triplet";
    case ErrorKind::BlockedTask: return "blocked task";
    case ErrorKind::InfeasiblePadding: return "infeasible padding";
    case ErrorKind::SynthesisFailure: return "synthesis failure";
    case ErrorKind::TubeViolation: return "tube violation";
    case ErrorKind::FunnelViolation: return "funnel violation";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

}  // namespace tubesynth
