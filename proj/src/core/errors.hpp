#pragma once

#include <stdexcept>
#include <string>

namespace drdoo {

/// Base of every exception thrown by the core library. The C API maps each
/// subclass onto one status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: wrong lengths, non-positive weights, bad parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to converge or lost its bracket.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// The dual variable could not be bracketed inside the conjugate domain.
class DomainError : public SolverError {
 public:
  DomainError(const std::string& what, double boundary)
      : SolverError(what), boundary_(boundary) {}
  double boundary() const noexcept { return boundary_; }

 private:
  double boundary_;
};

/// The requested quantity is not defined for this model class.
class Unavailable : public Error {
 public:
  using Error::Error;
};

/// Configuration text could not be parsed or validated.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failures (unwritable output directory, unreadable sample).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace drdoo
