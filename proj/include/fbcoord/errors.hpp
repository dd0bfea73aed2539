#pragma once

#include <stdexcept>
#include <string>

namespace fbc {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A Cholesky pivot fell below n * eps * trace(Q).
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// U^H Q U is numerically singular (condition number above 1e12).
class SingularProjection : public Error {
 public:
  using Error::Error;
};

class InfeasibleAllocation : public Error {
 public:
  using Error::Error;
};

class BelowMinDistance : public Error {
 public:
  using Error::Error;
};

class RejectionBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Solver failure inside the coordination engine, tagged with where it happened.
class CoordinationError : public Error {
 public:
  CoordinationError(const std::string& what, int node, const char* phase, int iteration)
      : Error(what + " [node " + std::to_string(node) + ", " + phase + " phase, iteration " +
              std::to_string(iteration) + "]"),
        node_(node),
        iteration_(iteration) {}
  int node() const { return node_; }
  int iteration() const { return iteration_; }

 private:
  int node_;
  int iteration_;
};

}  // namespace fbc
