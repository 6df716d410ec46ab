#pragma once

#include <stdexcept>
#include <string>

namespace ace {

// Input violates a domain precondition (empty successor set, out-of-bounds cell, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Bad hyperparameters or experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed serialized artifact. The message carries the offending field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Statistical test called with too few usable observations.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broken internal invariant; never expected in a correct build.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ace
