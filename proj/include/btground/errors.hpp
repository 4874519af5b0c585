#pragma once

#include <stdexcept>
#include <string>

namespace btground {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structural misuse: universe mismatch, unknown action/policy ids.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An action model was applied in a state that does not satisfy its
/// precondition. Distinct from DomainError so callers can tell a broken
/// plan from a broken setup.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A configured cap was exceeded (enumeration size, expansion budget,
/// oracle state-space guard).
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// The precondition of a model cannot be embedded in any mutex-consistent
/// scenario.
class UnsatisfiableScenarioError : public Error {
 public:
  using Error::Error;
};

/// Text input rejected by a parser; carries the first error location.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(msg + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_ = 0;
  int column_ = 0;
};

/// External proposer adapter misbehaved: timeout, malformed record,
/// dead process, unreachable endpoint.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace btground
