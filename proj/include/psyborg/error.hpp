#pragma once

#include <stdexcept>
#include <string>

namespace psyborg {

/// Base of every exception thrown by the library. The C API maps each
/// subclass onto a distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid scenario, range, or option value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Choice-model calibration has no solution for the requested targets.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// An operation was called on state that violates its precondition
/// (cracking an already-cracked file, firing a trigger twice, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing an artifact failed, or the artifact is malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace psyborg
