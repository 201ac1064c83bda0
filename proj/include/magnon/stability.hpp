#pragma once

// Stability of linear drift matrices by two independent routes: the spectrum
// of A, and the Routh-Hurwitz determinant chain of det(lambda I - A).

#include "magnon/models.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace magnon {

/// Spectral abscissa below which a drift matrix counts as strictly stable.
inline constexpr double kStabilityEps = 1e-12;

/// det(lambda I - A) = sum_k coeffs[k] lambda^(n-k), coeffs[0] = 1.
struct CharPoly {
  std::vector<double> coeffs;

  [[nodiscard]] int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  /// a_k, zero outside 0..degree.
  [[nodiscard]] double a(int k) const {
    return (k < 0 || k > degree()) ? 0.0 : coeffs[static_cast<std::size_t>(k)];
  }
};

enum class StabilityMethod { eigen, routh_hurwitz };

struct StabilityVerdict {
  bool stable = false;
  /// Largest real part of the spectrum (eigen method only), rad/ns.
  std::optional<double> margin;
  StabilityMethod method = StabilityMethod::eigen;
  /// 1-based index of the first non-positive Hurwitz determinant.
  std::optional<int> failed_condition;
  std::vector<double> hurwitz_determinants;
  /// For degree 6: 1-based index into {a_1..a_6 > 0, a1a2 > a3,
  /// a1a2a3 > a3^2 + a1^2 a4, T1 > T2, T3 > T4} of the first violated entry.
  std::optional<int> simplified_failed;
};

/// Faddeev-LeVerrier: M_k = A M_{k-1} + c_{k-1} I, c_k = -tr(A M_k)/k.
inline CharPoly char_poly_numeric(const DriftMatrix& drift) {
  const Eigen::MatrixXd& a = drift.a;
  const Eigen::Index n = a.rows();
  if (a.rows() != a.cols() || (n != 2 && n != 4 && n != 6)) {
    throw std::invalid_argument("char_poly_numeric: unsupported dimension " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " (expected 2, 4 or 6)");
  }
  CharPoly cp;
  cp.coeffs.assign(static_cast<std::size_t>(n + 1), 0.0);
  cp.coeffs[0] = 1.0;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    m = a * m + cp.coeffs[static_cast<std::size_t>(k - 1)] * id;
    cp.coeffs[static_cast<std::size_t>(k)] = -(a * m).trace() / static_cast<double>(k);
  }
  return cp;
}

/// Closed-form coefficients a_0..a_6 of the three-mode drift in arithmetic
/// type T.
///
/// Two groupings of the printed formulas are misprinted and are corrected
/// here against symbolic expansion of det(lambda I - A):
///  - a_5: the omega_2^2 group reads 4 omega_2^2 kappa (gamma_1(gamma_1 + kappa) + 4 varpi^2);
///  - a_6: +16 g1^4 sits inside the factor multiplying (gamma_2^2 + 4 omega_2^2).
template <class T>
std::array<T, 7> closed_form_coefficients(const RwaCoefficients& c) {
  const T k = c.kappa, y1 = c.gamma_1, y2 = c.gamma_2;
  const T wc = c.omega_c, vp = c.varpi, w2 = c.omega_2;
  const T g1 = c.g1, g2 = c.g2;
  const T k2 = k * k, y12 = y1 * y1, y22 = y2 * y2;
  const T wc2 = wc * wc, vp2 = vp * vp, w22 = w2 * w2;
  const T g12 = g1 * g1, g22 = g2 * g2;

  std::array<T, 7> cp;
  cp[0] = T(1);
  cp[1] = y1 + y2 + k;
  cp[2] = 0.25 * (y12 + y22 + k2) + y1 * y2 + y1 * k + y2 * k - 2.0 * g12 + 2.0 * g22 + w22 + wc2 + vp2;
  cp[3] = 0.25 * (y12 * y2 + y12 * k + y1 * y22 + 4.0 * y1 * y2 * k + 4.0 * wc2 * (y1 + y2) + y1 * k2 +
                         4.0 * y1 * w22 + y22 * k + y2 * k2 + 4.0 * y2 * vp2 - 4.0 * g12 * (y1 + 2.0 * y2 + k) +
                         4.0 * g22 * (2.0 * y1 + y2 + k) + 4.0 * k * w22 + 4.0 * k * vp2);
  cp[4] =
      (16.0 * g12 * g12 + 16.0 * g22 * g22 + y12 * y22 + 4.0 * y12 * y2 * k + 4.0 * y1 * y22 * k + y12 * k2 +
       4.0 * y1 * y2 * k2 + y22 * k2 + 4.0 * y22 * vp2 + 16.0 * y2 * k * vp2 + 4.0 * k2 * vp2 + 4.0 * y12 * w22 +
       16.0 * y1 * k * w22 + 4.0 * k2 * w22 + 16.0 * w22 * vp2 +
       4.0 * wc2 * (y12 + 4.0 * y1 * y2 + y22 + 4.0 * (w22 + vp2)) -
       8.0 * g12 * (4.0 * g22 + 2.0 * y1 * y2 + y22 + y1 * k + 2.0 * y2 * k + 4.0 * w22 + 4.0 * wc * vp) +
       8.0 * g22 * (y12 + y2 * k + 2.0 * y1 * (y2 + k) - 4.0 * w2 * wc + 4.0 * vp2)) /
      16.0;
  cp[5] =
      (16.0 * g22 * g22 * y1 + 16.0 * g12 * g12 * y2 + y2 * k * (y1 * y2 * k + y12 * (y2 + k) + 4.0 * (y2 + k) * vp2) +
       4.0 * w22 * k * (y1 * (y1 + k) + 4.0 * vp2) + 4.0 * wc2 * (y1 * y2 * (y1 + y2) + 4.0 * y2 * vp2 + 4.0 * y1 * w22) -
       4.0 * g12 *
           (4.0 * g22 * (y1 + y2) + y22 * k + 4.0 * k * w22 + y1 * (y22 + 2.0 * y2 * k + 4.0 * w22) +
            8.0 * y2 * vp * wc) +
       4.0 * g22 * (y12 * (y2 + k) + 4.0 * vp2 * (y2 + k) + 2.0 * y1 * (y2 * k - 4.0 * w2 * wc))) /
      16.0;
  cp[6] =
      (-8.0 * g22 * (4.0 * g12 * (y1 * y2 - 4.0 * w2 * vp) - (y12 + 4.0 * vp2) * (y2 * k - 4.0 * w2 * wc)) +
       (y22 + 4.0 * w22) * ((y12 + 4.0 * vp2) * (k2 + 4.0 * wc2) - 8.0 * g12 * (y1 * k + 4.0 * wc * vp) + 16.0 * g12 * g12) +
       16.0 * g22 * g22 * (y12 + 4.0 * vp2)) /
      64.0;
  return cp;
}

inline CharPoly char_poly_closed_form(const RwaCoefficients& c) {
  const auto a = closed_form_coefficients<double>(c);
  return CharPoly{std::vector<double>(a.begin(), a.end())};
}

/// Which upper bound zeroes entries a_{2i-j} of the k-th Hurwitz matrix.
/// `degree` (standard) bounds by the polynomial degree; `order` bounds by k.
/// Only `degree` reproduces the spectral verdict for k < degree.
enum class HurwitzBound { degree, order };

/// k-th matrix (k = 1..degree) has entries a_{2i-j}, 1 <= i, j <= k.
inline std::vector<Eigen::MatrixXd> hurwitz_matrices(const CharPoly& cp, HurwitzBound bound = HurwitzBound::degree) {
  const int n = cp.degree();
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    const int upper = bound == HurwitzBound::degree ? n : k;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (int i = 1; i <= k; ++i) {
      for (int j = 1; j <= k; ++j) {
        const int idx = 2 * i - j;
        if (idx >= 0 && idx <= upper) t(i - 1, j - 1) = cp.a(idx);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

namespace detail {

/// Determinant by Gaussian elimination with partial pivoting; works for any
/// ordered field type.
template <class T>
T determinant(std::vector<std::vector<T>> m) {
  using std::abs;
  const std::size_t n = m.size();
  T det = T(1);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (abs(m[r][col]) > abs(m[pivot][col])) pivot = r;
    }
    if (m[pivot][col] == T(0)) return T(0);
    if (pivot != col) {
      std::swap(m[pivot], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const T f = m[r][col] / m[col][col];
      for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return det;
}

template <class T>
std::optional<int> simplified_conditions(const std::vector<T>& a) {
  if (a.size() != 7) return std::nullopt;
  const T &a1 = a[1], &a2 = a[2], &a3 = a[3], &a4 = a[4], &a5 = a[5], &a6 = a[6];
  for (int k = 1; k <= 6; ++k) {
    if (!(a[static_cast<std::size_t>(k)] > 0)) return k;
  }
  if (!(a1 * a2 > a3)) return 7;
  if (!(a1 * a2 * a3 > a3 * a3 + a1 * a1 * a4)) return 8;
  const T t1 = (a1 * a4 - a5) * (a1 * a2 * a3 - a3 * a3 - a1 * a1 * a4);
  const T t2 = a1 * a5 * a5 + a5 * (a1 * a2 - a3) * (a1 * a2 - a3);
  if (!(t1 > t2)) return 9;
  const T t3 = a1 * a1 * a6 * (2 * a2 * a5 + a3 * a4) + a3 * a3 * a3 * a6 + a1 * a2 * a3 * a4 * a5 +
               a5 * a5 * (2 * a1 * a4 + a2 * a3);
  const T t4 = a1 * a1 * (a1 * a6 * a6 + a4 * a4 * a5) + a5 * a5 * a5 + a4 * a5 * a3 * a3 +
               a1 * (a2 * a6 * a3 * a3 + 3 * a3 * a5 * a6 + a2 * a2 * a5 * a5);
  if (!(t3 > t4)) return 10;
  return std::nullopt;
}

template <class T>
StabilityVerdict routh_hurwitz_chain(const std::vector<T>& a, HurwitzBound bound) {
  const int n = static_cast<int>(a.size()) - 1;
  StabilityVerdict v;
  v.method = StabilityMethod::routh_hurwitz;
  v.stable = true;
  for (int k = 1; k <= n; ++k) {
    const int upper = bound == HurwitzBound::degree ? n : k;
    std::vector<std::vector<T>> t(static_cast<std::size_t>(k), std::vector<T>(static_cast<std::size_t>(k), T(0)));
    for (int i = 1; i <= k; ++i) {
      for (int j = 1; j <= k; ++j) {
        const int idx = 2 * i - j;
        if (idx >= 0 && idx <= upper) t[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] = a[static_cast<std::size_t>(idx)];
      }
    }
    const T det = determinant(std::move(t));
    v.hurwitz_determinants.push_back(static_cast<double>(det));
    if (v.stable && !(det > 0)) {
      v.stable = false;
      v.failed_condition = k;
    }
  }
  v.simplified_failed = simplified_conditions(a);
  return v;
}

}  // namespace detail

/// Stable iff every Hurwitz determinant is positive. The simplified condition
/// set is evaluated alongside for diagnostics only.
inline StabilityVerdict routh_hurwitz_stable(const CharPoly& cp, HurwitzBound bound = HurwitzBound::degree) {
  return detail::routh_hurwitz_chain(cp.coeffs, bound);
}

/// 50 significant decimal digits.
using ExtendedReal = boost::multiprecision::cpp_bin_float_50;

/// Routh-Hurwitz on the closed-form coefficients with both the coefficients
/// and the determinant chain evaluated in ExtendedReal. Near-degenerate carrier
/// frequencies (Delta_1, Delta_2 -> 0) cluster the roots of the sextic so
/// tightly that double-precision Hurwitz determinants carry no correct digits.
inline StabilityVerdict routh_hurwitz_stable(const RwaCoefficients& c, HurwitzBound bound = HurwitzBound::degree) {
  const auto a = closed_form_coefficients<ExtendedReal>(c);
  return detail::routh_hurwitz_chain(std::vector<ExtendedReal>(a.begin(), a.end()), bound);
}

namespace detail {
/// Diagonal similarity D^{-1} A D equalizing row and column norms (radix 2).
inline Eigen::MatrixXd balance(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double f = 1.0;
      const double s = c + r;
      while (c < r / 2.0) {
        c *= 2.0;
        r /= 2.0;
        f *= 2.0;
      }
      while (c >= r * 2.0) {
        c /= 2.0;
        r *= 2.0;
        f /= 2.0;
      }
      if ((c + r) < 0.95 * s) {
        converged = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
  return a;
}
}  // namespace detail

inline Eigen::VectorXcd eigenvalues(const DriftMatrix& drift) {
  if (drift.a.rows() != drift.a.cols() || drift.a.rows() == 0) {
    throw std::invalid_argument("eigenvalues: drift matrix must be square");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(detail::balance(drift.a), false);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigen_stable: eigenvalue iteration did not converge");
  }
  return solver.eigenvalues();
}

/// Marginal spectra (max Re lambda in [-1e-12, 0]) count as unstable.
inline StabilityVerdict eigen_stable(const DriftMatrix& drift) {
  StabilityVerdict v;
  v.method = StabilityMethod::eigen;
  v.margin = eigenvalues(drift).real().maxCoeff();
  v.stable = *v.margin < -kStabilityEps;
  return v;
}

}  // namespace magnon
