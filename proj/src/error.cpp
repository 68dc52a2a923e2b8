#include "farsep/error.hpp"

namespace farsep {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Length: return "length error";
    case ErrorCode::Shape: return "shape error";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::DegenerateSteering: return "degenerate steering";
    case ErrorCode::NoSignal: return "no signal";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::UnsupportedCombination: return "unsupported combination";
    case ErrorCode::DegenerateTarget: return "degenerate target";
    case ErrorCode::DegenerateReference: return "degenerate reference";
    case ErrorCode::Decomposition: return "decomposition error";
    case ErrorCode::SingularDistance: return "singular distance";
    case ErrorCode::Format: return "format error";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Usage: return "usage error";
  }
  return "error";
}

}  // namespace farsep
