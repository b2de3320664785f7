#include "ringlab/error.hpp"

#include <cmath>

namespace ringlab {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Ok: return "ok";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::Pole: return "pole";
    case ErrorCode::SingularMoment: return "singular-moment";
    case ErrorCode::Degenerate: return "degenerate";
    case ErrorCode::OutOfSupport: return "out-of-support";
    case ErrorCode::GridTooCoarse: return "grid-too-coarse";
    case ErrorCode::HypothesisViolated: return "hypothesis-violated";
    case ErrorCode::OutOfRegime: return "out-of-regime";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
    case ErrorCode::Numeric: return "numeric";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

UpperHalfPoint::UpperHalfPoint(double e, double h) : E(e), eta(h) {
  require(std::isfinite(e) && std::isfinite(h), ErrorCode::Domain, "point must be finite");
  require(h > 0.0, ErrorCode::Domain, "point must lie in the open upper half-plane (eta > 0)");
}

}  // namespace ringlab
