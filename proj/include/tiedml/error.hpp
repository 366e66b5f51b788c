#pragma once

#include <stdexcept>
#include <string>

namespace tiedml {

/// Argument outside the mathematical domain of an operation (time past the
/// horizon, value range past the final value, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid configuration: bad family parameters, missing tail index, malformed
/// lifetime spec, unknown config keys.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to reach its target (quadrature, linear solve,
/// iteration budget, memory bound).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input is valid but degenerate for the requested construction, e.g. a path
/// with no point of increase in (0,1] handed to tie_down.
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace tiedml
