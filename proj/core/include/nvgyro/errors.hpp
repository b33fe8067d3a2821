#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nvgyro {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Diagonalization failure, loss of unitarity, non-physical density matrix.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A closed-form ZQ denominator is within the guard band of zero.
class GslacProximityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Sequence text diagnostics carry a 1-based line and column.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error(std::to_string(line) + ":" + std::to_string(column) +
              ": error: " + message),
        line_(line),
        column_(column),
        message_(message) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

class BindingError : public Error {
 public:
  using Error::Error;
};

}  // namespace nvgyro
