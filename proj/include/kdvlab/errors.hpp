#pragma once

#include <stdexcept>
#include <string>

namespace kdvlab {

// Validation problems throw std::invalid_argument; these cover failures of the numerics.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConservationFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace kdvlab
