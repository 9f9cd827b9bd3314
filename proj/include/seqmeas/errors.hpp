#pragma once

#include <stdexcept>
#include <string>

namespace seqmeas {

/// Input data violates a type invariant (negative probability, bad normalization, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation was called outside the domain where its result is defined.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operands have incompatible dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace seqmeas
