#pragma once

#include <stdexcept>
#include <string>

namespace homb {

// Base for all typed failures raised by the library. CLI maps subclasses to
// distinct exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
  using Error::Error;
};
struct GridMismatch : Error {
  using Error::Error;
};
struct SymmetryViolation : Error {
  using Error::Error;
};
struct NotElliptic : Error {
  using Error::Error;
};
struct NoConvergence : Error {
  using Error::Error;
};
struct IncompatibleRHS : Error {
  using Error::Error;
};
struct HomSingular : Error {
  using Error::Error;
};
struct CoercivityFailure : Error {
  using Error::Error;
};
struct NoSeparation : Error {
  using Error::Error;
};
struct EpsilonTooLarge : Error {
  using Error::Error;
};
struct EmptySpectrumList : Error {
  using Error::Error;
};
struct InsufficientData : Error {
  using Error::Error;
};
struct MismatchedFibers : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace homb
