#pragma once

// Covariance-matrix algebra for n-mode Gaussian states.
//
// Quadratures are ordered (X_1, Y_1, X_2, Y_2, ...) with X = (a^dag + a)/sqrt(2)
// and Y = i(a^dag - a)/sqrt(2), so the vacuum covariance is I/2.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace magnon {

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kPhysicalityTol = 1e-9;

struct ModeLayout {
  std::size_t n_modes = 0;

  explicit ModeLayout(std::size_t n) : n_modes(n) {
    if (n == 0) throw std::invalid_argument("ModeLayout: n_modes must be positive");
  }
  [[nodiscard]] Eigen::Index dim() const { return static_cast<Eigen::Index>(2 * n_modes); }
  friend bool operator==(const ModeLayout&, const ModeLayout&) = default;
};

/// Cavity, magnon 1, magnon 2.
inline ModeLayout three_mode_layout() { return ModeLayout{3}; }

/// Block-diagonal symplectic form with per-mode blocks [[0, 1], [-1, 0]].
inline Eigen::MatrixXd symplectic_form(const ModeLayout& layout) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(layout.dim(), layout.dim());
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(layout.n_modes); ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

class CovarianceMatrix {
 public:
  /// Throws std::invalid_argument unless `data` is square, of even dimension,
  /// and symmetric to kSymmetryTol.
  explicit CovarianceMatrix(Eigen::MatrixXd data) : data_(std::move(data)), layout_(check_shape(data_)) {
    const double asym = (data_ - data_.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= kSymmetryTol)) {
      throw std::invalid_argument("CovarianceMatrix: not symmetric (max asymmetry " + std::to_string(asym) + ")");
    }
  }

  [[nodiscard]] const Eigen::MatrixXd& data() const { return data_; }
  [[nodiscard]] const ModeLayout& layout() const { return layout_; }
  [[nodiscard]] std::size_t n_modes() const { return layout_.n_modes; }
  [[nodiscard]] Eigen::Index dim() const { return layout_.dim(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return data_(i, j); }

  /// 2x2 block between modes i and j.
  [[nodiscard]] Eigen::Matrix2d block(std::size_t i, std::size_t j) const {
    check_mode(i);
    check_mode(j);
    return data_.block<2, 2>(static_cast<Eigen::Index>(2 * i), static_cast<Eigen::Index>(2 * j));
  }

  void check_mode(std::size_t mode) const {
    if (mode >= layout_.n_modes) {
      throw std::out_of_range("mode index " + std::to_string(mode) + " out of range for " +
                              std::to_string(layout_.n_modes) + "-mode state");
    }
  }

 private:
  static ModeLayout check_shape(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() == 0 || m.rows() % 2 != 0) {
      throw std::invalid_argument("CovarianceMatrix: expected a non-empty square matrix of even dimension");
    }
    return ModeLayout{static_cast<std::size_t>(m.rows() / 2)};
  }

  Eigen::MatrixXd data_;
  ModeLayout layout_;
};

inline CovarianceMatrix vacuum_cm(const ModeLayout& layout) {
  return CovarianceMatrix{0.5 * Eigen::MatrixXd::Identity(layout.dim(), layout.dim())};
}

/// Mean excitation number <a^dag a> = (sigma_xx + sigma_yy - 1)/2.
inline double mode_population(const CovarianceMatrix& cm, std::size_t mode) {
  cm.check_mode(mode);
  const auto k = static_cast<Eigen::Index>(2 * mode);
  return 0.5 * (cm(k, k) + cm(k + 1, k + 1) - 1.0);
}

/// [[Phi_i, Phi_ij], [Phi_ij^T, Phi_j]].
inline CovarianceMatrix reduce_two_mode(const CovarianceMatrix& cm, std::size_t i, std::size_t j) {
  if (i == j) throw std::invalid_argument("reduce_two_mode: modes must differ");
  cm.check_mode(i);
  cm.check_mode(j);
  Eigen::MatrixXd out(4, 4);
  out.topLeftCorner<2, 2>() = cm.block(i, i);
  out.topRightCorner<2, 2>() = cm.block(i, j);
  out.bottomLeftCorner<2, 2>() = cm.block(j, i);
  out.bottomRightCorner<2, 2>() = cm.block(j, j);
  return CovarianceMatrix{std::move(out)};
}

/// Minimum eigenvalue of the Hermitian matrix sigma + (i/2) Omega.
/// Values >= -kPhysicalityTol mean the uncertainty principle holds.
inline double physicality_margin(const CovarianceMatrix& cm) {
  const Eigen::MatrixXcd h =
      cm.data().cast<std::complex<double>>() + std::complex<double>(0.0, 0.5) * symplectic_form(cm.layout()).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

inline bool is_physical(const CovarianceMatrix& cm) { return physicality_margin(cm) >= -kPhysicalityTol; }

/// Two-mode squeezed vacuum S(r)|0,0>.
inline CovarianceMatrix two_mode_squeezed_cm(double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("two_mode_squeezed_cm: r must be >= 0");
  const double c = 0.5 * std::cosh(2.0 * r);
  const double s = 0.5 * std::sinh(2.0 * r);
  Eigen::MatrixXd m(4, 4);
  m << c, 0, s, 0,
       0, c, 0, -s,
       s, 0, c, 0,
       0, -s, 0, c;
  return CovarianceMatrix{std::move(m)};
}

/// Logarithmic negativity max(0, -ln(2 eta_minus)) of a two-mode state, where
/// eta_minus is the smallest symplectic eigenvalue of the partial transpose.
///
/// eta_minus^2 = (W - sqrt(W^2 - 4 det)) / 2 is evaluated in the equivalent
/// form 2 det / (W + sqrt(W^2 - 4 det)), which does not cancel for strongly
/// squeezed states.
inline double log_negativity(const CovarianceMatrix& cm4) {
  if (cm4.n_modes() != 2) throw std::invalid_argument("log_negativity: expected a 4x4 covariance matrix");
  const Eigen::Matrix2d a = cm4.block(0, 0);
  const Eigen::Matrix2d b = cm4.block(1, 1);
  const Eigen::Matrix2d c = cm4.block(0, 1);
  const double det_full = cm4.data().determinant();
  const double w = a.determinant() + b.determinant() - 2.0 * c.determinant();

  double radicand = w * w - 4.0 * det_full;
  if (radicand < -kPhysicalityTol) {
    throw std::domain_error("log_negativity: W^2 - 4 det < 0, covariance matrix is unphysical");
  }
  radicand = std::max(radicand, 0.0);
  const double denom = w + std::sqrt(radicand);

  double eta2 = denom > 0.0 ? 2.0 * det_full / denom : -1.0;
  if (eta2 < -kPhysicalityTol || denom <= 0.0) {
    throw std::domain_error("log_negativity: negative symplectic radicand, covariance matrix is unphysical");
  }
  if (eta2 <= 0.0) return std::numeric_limits<double>::infinity();
  return std::max(0.0, -std::log(2.0 * std::sqrt(eta2)));
}

}  // namespace magnon
