#pragma once

#include <stdexcept>
#include <string>

namespace altstand {

/// Invalid parameter set (bad config value, violated type invariant).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace altstand
