#pragma once

#include <stdexcept>
#include <string>

namespace qprad {

// Caller broke a documented precondition (negative time, unsupported length...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Scenario or model configuration is inconsistent. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data cannot be parsed or has the wrong shape. CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical integration left the physical domain.
class NumericalInstability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qprad
