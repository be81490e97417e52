#pragma once

#include <stdexcept>
#include <string>

namespace bayestomo {

/// Argument outside the mathematical domain of an operation (h outside [0,1],
/// a Bloch vector longer than one, a non-positive-semidefinite matrix, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Structurally malformed input: unknown atom labels, missing strings,
/// unparseable documents.
class MalformedInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The observed data has zero probability under every hypothesis the prior
/// supports.
class ImpossibleData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conditioning on an event of probability zero.
class ConditioningOnFalse : public std::domain_error {
 public:
  ConditioningOnFalse()
      : std::domain_error("conditioning on known-false statement") {}
};

/// An operation that is not defined for the given prior kind.
class NotApplicable : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace bayestomo
