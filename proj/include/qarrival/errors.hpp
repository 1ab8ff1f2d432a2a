#pragma once

#include <stdexcept>
#include <string>

namespace qarrival {

// Bad input: violated precondition or malformed configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The numerics could not continue (singular system, edge contamination).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EdgeContamination : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace qarrival
