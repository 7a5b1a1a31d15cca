#pragma once

#include <stdexcept>
#include <string>

namespace plilab {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent or invalid matrix dimensions (also non-finite entries).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that had to be Hurwitz (possibly with a delta margin) was not.
/// Carries the offending spectral abscissa.
class StabilityError : public Error {
 public:
  StabilityError(const std::string& what, double abscissa)
      : Error(what), abscissa_(abscissa) {}
  double abscissa() const noexcept { return abscissa_; }

 private:
  double abscissa_;
};

/// A numerical procedure failed (singular system, lost accuracy,
/// iteration did not converge within its budget).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A pair (A, B) that had to be controllable was not.
class ControllabilityError : public Error {
 public:
  using Error::Error;
};

/// A sampling procedure produced no admissible point.
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// A trajectory did not meet the preconditions of a certifier.
class CertificationError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration (unknown key, bad value, missing file).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace plilab
