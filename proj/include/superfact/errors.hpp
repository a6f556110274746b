#pragma once

#include <stdexcept>
#include <string>

namespace superfact {

/// Evaluation hit a singular denominator or left the valid coordinate region.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Square root of a second integral that is not strictly positive.
class PositivityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Operation not defined for the requested system family.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Caller violated a documented precondition (empty counts, bad tolerances).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid system parameters or configuration input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace superfact
