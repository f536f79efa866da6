#pragma once

#include <stdexcept>
#include <string>

namespace cotlab {

// Invalid numeric parameter or arity (K < 2, cap <= 0, arity mismatch, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A point does not belong to the space it is used in.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed expression text or scenario document.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Amplification breakpoints requested outside the mixed regime.
class RegimeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A chain-rule step or answer left the representation space.
class TrajectoryError : public std::runtime_error {
 public:
  TrajectoryError(int step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}

  int step() const noexcept { return step_; }

 private:
  int step_;
};

}  // namespace cotlab
