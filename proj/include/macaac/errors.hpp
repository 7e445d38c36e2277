#pragma once

#include <stdexcept>
#include <string>

namespace macaac {

// Shape disagreement between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A precondition of an operation was violated by the caller.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An object was used in a state that does not permit the call.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite values appeared (training divergence).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file did not have the expected layout (missing CSV column, bad checkpoint).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration value or command line.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace macaac
