#pragma once

#include <stdexcept>
#include <string>

namespace qbring {

// Thrown when a requested system size exceeds a documented dense/enumeration
// limit. The CLI maps this to exit code 3.
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on numerical failures (step-size collapse, positivity violation,
// broken preconditions on matrix inputs). CLI exit code 4.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on malformed run configurations. CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qbring
