#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace ringlab {

using cplx = std::complex<double>;

enum class ErrorCode {
  Ok = 0,
  InvalidArgument,
  Domain,
  Unsupported,
  NonConvergence,
  Pole,
  SingularMoment,
  Degenerate,
  OutOfSupport,
  GridTooCoarse,
  HypothesisViolated,
  OutOfRegime,
  Config,
  Io,
  Numeric,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

/// A point E + i*eta of the open upper half-plane.
struct UpperHalfPoint {
  double E = 0.0;
  double eta = 1.0;

  UpperHalfPoint() = default;
  UpperHalfPoint(double e, double h);
  static UpperHalfPoint from(cplx z) { return {z.real(), z.imag()}; }
  cplx z() const { return {E, eta}; }
};

}  // namespace ringlab
