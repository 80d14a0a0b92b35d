#pragma once

#include <stdexcept>
#include <string>

namespace almostmin {

// Base for every error raised by the library. CLI maps these onto exit codes.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SpecError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

struct AccuracyError : Error {
  using Error::Error;
};
struct EmptyComplementError : Error {
  using Error::Error;
};
struct OutOfBox : Error {
  using Error::Error;
};

struct UnresolvedRegion : Error {
  using Error::Error;
};
struct OrderError : Error {
  using Error::Error;
};
struct InsufficientSamples : Error {
  using Error::Error;
};

struct QuadratureBudgetExceeded : Error {
  using Error::Error;
};
struct DomainMismatch : Error {
  using Error::Error;
};
struct CloseEnoughViolation : Error {
  using Error::Error;
};
struct NewtonDivergence : Error {
  using Error::Error;
};
struct DomainExceeded : Error {
  using Error::Error;
};

struct DegenerateEta : Error {
  using Error::Error;
};
struct KappaSearchFailure : Error {
  using Error::Error;
};
struct TrackingLoss : Error {
  using Error::Error;
};

}  // namespace almostmin
