#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace syndromestat {

/// Input violates a documented invariant (bad code, bad rates, bad flags).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operand shapes disagree (bit-vector lengths, flavor counts, ...).
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An exact computation would exceed the configured enumeration budget.
class SizeError : public std::runtime_error {
 public:
  SizeError(const std::string& what, double required_budget)
      : std::runtime_error(what), required_budget_(required_budget) {}
  double required_budget() const { return required_budget_; }

 private:
  double required_budget_;
};

/// A quantity expected to be finite came out NaN or infinite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace syndromestat
