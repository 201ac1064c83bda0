#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace magnon {

inline constexpr int kBesselMaxOrder = 60;
inline constexpr double kBesselMaxArg = 30.0;

/// Bessel function of the first kind J_f(x) for integer order, |f| <= 60 and
/// |x| <= 30, absolute accuracy ~1e-15.
///
/// Miller's downward recurrence normalized by J_0 + 2 sum_k J_2k = 1. The
/// start index sits well above max(|f|, |x|), so the same path is used on the
/// whole supported range.
inline double bessel_j(int f, double x) {
  if (std::abs(f) > kBesselMaxOrder || !(std::abs(x) <= kBesselMaxArg)) {
    throw std::domain_error("bessel_j: arguments outside supported range (|f| <= 60, |x| <= 30), got f=" +
                            std::to_string(f) + " x=" + std::to_string(x));
  }
  const int n = std::abs(f);
  // J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x).
  const double sign = ((f < 0) != (x < 0)) && (n % 2 == 1) ? -1.0 : 1.0;
  const double ax = std::abs(x);
  if (ax == 0.0) return n == 0 ? 1.0 : 0.0;

  const double top = std::max(static_cast<double>(n), ax);
  int start = static_cast<int>(top + 30.0 + std::sqrt(60.0 * top));
  start += start % 2;

  constexpr double kRescale = 1e250;
  double next = 0.0;  // J_{k+1}
  double cur = 1e-300;  // J_k
  double norm = 0.0;
  double result = 0.0;
  for (int k = start; k >= 1; --k) {
    const double prev = 2.0 * k / ax * cur - next;  // J_{k-1}
    next = cur;
    cur = prev;
    if (std::abs(cur) > kRescale) {
      cur /= kRescale;
      next /= kRescale;
      norm /= kRescale;
      result /= kRescale;
    }
    if (k - 1 == n) result = cur;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
  }
  norm += cur;  // J_0 term
  return sign * result / norm;
}

}  // namespace magnon
