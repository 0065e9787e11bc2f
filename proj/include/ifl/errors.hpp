#pragma once

#include <stdexcept>
#include <string>

namespace ifl {

/// Operand dimensions do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or unreadable input data (files, label sets, empty inputs).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite values or a numerical breakdown.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A cluster lost all of its mass during refinement.
class DegenerateClusterError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace ifl
