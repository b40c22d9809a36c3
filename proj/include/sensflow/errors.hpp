#pragma once

#include <stdexcept>
#include <string>

namespace sensflow {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument (bad step size, negative tolerance, shape mismatch, ...).
struct ArgumentError : Error {
  using Error::Error;
};

// A set-valued field returned no admissible drift at a point.
struct FieldUndefinedError : Error {
  using Error::Error;
};

// sup||U|| == 0, the sensitivity ratio is undefined.
struct UndefinedRatioError : Error {
  using Error::Error;
};

// Operation requires an SOF system and the input is not one.
struct NotApplicableError : Error {
  using Error::Error;
};

// Input outside the supported class (e.g. defective drift matrix).
struct UnsupportedError : Error {
  using Error::Error;
};

// Point outside the domain of an implicitly defined function.
struct DomainError : Error {
  using Error::Error;
};

// Numerical failure (bracket expansion exhausted, eigensolver failure, ...).
struct NumericError : Error {
  using Error::Error;
};

// A certified construction failed to satisfy one of its own invariants.
struct ConstructionFailedError : Error {
  using Error::Error;
};

// Spread-membership solve produced a point violating the |y0| < eps/3 budget.
struct MembershipFailedError : Error {
  using Error::Error;
};

// Experiment configuration rejected at parse/validation time.
struct ConfigError : Error {
  std::string field;
  ConfigError(const std::string& field_path, const std::string& message)
      : Error(message), field(field_path) {}
};

}  // namespace sensflow
