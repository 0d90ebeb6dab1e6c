#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace udw {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates an operation's precondition (bad sizes, nonpositive lengths, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Iterative method failed to reach its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Request is well formed but outside what the engine can evaluate.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

struct FieldError {
  int line = 0;  // 1-based, 0 when unknown
  std::string field;
  std::string message;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<FieldError> errors);
  const std::vector<FieldError>& errors() const { return errors_; }

 private:
  std::vector<FieldError> errors_;
};

}  // namespace udw
