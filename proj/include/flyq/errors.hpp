#pragma once

#include <stdexcept>
#include <string>

namespace flyq {

/// Invalid scenario, geometry or parameter set. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A desk-scale resource cap (dimension, depth, coordinate range) was exceeded.
class CapExceeded : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Something tried to move information outside the causal future of its source.
/// Maps to CLI exit code 4.
class CausalityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands of incompatible dimension or shape.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace flyq
