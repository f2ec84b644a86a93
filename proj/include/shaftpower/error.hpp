#pragma once

#include <stdexcept>
#include <string>

namespace shaftpower {

/// Input outside the mathematical domain of a formula (V <= 0, negative wave height, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller misuse: empty inputs, mismatched lengths, invalid configuration.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Missing or malformed columns / features.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optimisation produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shaftpower
