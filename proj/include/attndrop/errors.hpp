// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace attndrop {

/// Shape mismatch between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A hyperparameter or argument outside its valid range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inconsistent model / attention / run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Misuse of an API contract (e.g. backward twice on one graph).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A mathematical quantity is undefined for the given inputs.
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& what, double value)
      : std::domain_error(what), value_(value) {}

  /// The offending quantity (e.g. a negative radicand).
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace attndrop
