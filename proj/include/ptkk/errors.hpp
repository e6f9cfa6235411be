#pragma once

#include <stdexcept>
#include <string>

namespace ptkk {

// Bad inputs: parameter domains, malformed files, unsupported grids.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The numerics could not produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Repeated root within tolerance; residues are undefined there.
class DegenerateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A pole or zero sits on the real axis (within the boundary tolerance).
class BoundaryError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Formula evaluated outside the region where it is defined.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotDetectableError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace ptkk
