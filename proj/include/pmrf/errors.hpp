#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pmrf {

/// Base of every error the engine reports. Callers that only need a message
/// catch this; the CLI maps the concrete subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  enum class Kind { Malformed, IndexOutOfRange, Tautology };

  ParseError(Kind kind, std::size_t line, const std::string& detail)
      : Error("line " + std::to_string(line) + ": " + kind_name(kind) + ": " + detail),
        kind_(kind),
        line_(line) {}

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }

  static std::string kind_name(Kind kind) {
    switch (kind) {
      case Kind::Malformed: return "malformed line";
      case Kind::IndexOutOfRange: return "literal index out of range";
      case Kind::Tautology: return "tautological clause";
    }
    return "parse error";
  }

 private:
  Kind kind_;
  std::size_t line_;
};

/// An exhaustive routine was asked to handle an instance beyond its bound.
class InstanceTooLarge : public Error {
 public:
  using Error::Error;
};

/// A dense factor table would exceed the configured scope width.
class FactorTooLarge : public Error {
 public:
  FactorTooLarge(const std::string& what, int width)
      : Error(what + " (width " + std::to_string(width) + ")"), width_(width) {}
  int width() const { return width_; }

 private:
  int width_;
};

class DegenerateBelief : public Error {
 public:
  explicit DegenerateBelief(int variable)
      : Error("belief propagation produced an all-zero belief for variable " +
              std::to_string(variable)),
        variable_(variable) {}
  int variable() const { return variable_; }

 private:
  int variable_;
};

/// Formula sampling cannot start because the hard clauses have no solution.
class NoConsistentSample : public Error {
 public:
  using Error::Error;
};

}  // namespace pmrf
