#pragma once

#include <stdexcept>
#include <string>

namespace magnon {

/// A computation failed numerically: non-Hurwitz drift for a steady state,
/// Lyapunov residual too large, loss of physicality mid-propagation,
/// non-finite values.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Spectral and Routh-Hurwitz stability verdicts disagree away from the
/// stability boundary.
class VerdictMismatch : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace magnon
