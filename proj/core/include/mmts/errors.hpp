#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mmts {

// Root of every error thrown by the library. The CLI maps subclasses onto
// process exit codes (see tools/).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed an argument that violates an operation's precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A real-valued input lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// Data that parsed correctly but breaks a content invariant (NaN rows, non-unit
// rows, relevancy out of range, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (bad magic, unknown version).
class FormatError : public Error {
 public:
  using Error::Error;
};

// File payload shorter or longer than the header declares.
class TruncationError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public NumericError {
 public:
  DivergenceError(std::int64_t iteration, const std::string& what)
      : NumericError("diverged at iteration " + std::to_string(iteration) +
                     ": " + what),
        iteration_(iteration) {}

  std::int64_t iteration() const noexcept { return iteration_; }

 private:
  std::int64_t iteration_;
};

}  // namespace mmts
