#pragma once

#include <stdexcept>
#include <string>

namespace torusflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A field, diffeomorphism or direction violates a construction invariant.
class InvalidField : public Error {
 public:
  using Error::Error;
};

/// A quantity requiring a strictly positive (or nonvanishing) field was
/// asked of a field with a zero.
class VanishingField : public Error {
 public:
  using Error::Error;
};

/// The scalar field has a zero on the line s -> s*xi + proj(x).
class VanishesOnLine : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// Step-size underflow or a non-finite state in the ODE integrator.
class IntegrationFailure : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace torusflow
