#pragma once

#include <stdexcept>
#include <string>

namespace forkrl {

// Dimension or layout mismatch between operands.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// API called out of order or with state that does not belong to it.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A requested sample or resource cannot be produced from the current data.
class UnavailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Truncated, corrupted or incompatible serialized data.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical procedure failed to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace forkrl
