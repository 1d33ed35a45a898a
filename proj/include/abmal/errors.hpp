#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace abmal {

/// Precondition violation on caller-supplied data.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation invoked on an object that is not ready for it (e.g. unfitted Platt params).
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class SizeLimit : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A numeric routine finished but its result fails the optimality certificate.
class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Double oracle ran out of iterations before closing the best-response gap.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double gap)
      : std::runtime_error(what + " (gap " + std::to_string(gap) + ")"), gap_(gap) {}
  double gap() const noexcept { return gap_; }

 private:
  double gap_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No unlabeled instances remain to solicit.
class PoolExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace abmal
