#pragma once

#include <stdexcept>
#include <string>

namespace qfrac {

// Raised when an argument lies outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Raised when a computation cannot reach its tolerance (non-convergence,
// spurious imaginary parts, ill-conditioned systems).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qfrac
