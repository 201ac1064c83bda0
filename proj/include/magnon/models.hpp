#pragma once

// Physical parameters, quadratic Hamiltonians, and the linear Langevin
// drift/diffusion pair for the driven cavity + two-magnon system.
//
// Inputs are cyclic frequencies in GHz; everything derived is angular (rad/ns)
// and time is in ns.

#include "magnon/bessel.hpp"
#include "magnon/gaussian.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace magnon {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Cyclic GHz -> rad/ns.
constexpr double angular(double cyclic_ghz) { return kTwoPi * cyclic_ghz; }
/// rad/ns -> cyclic GHz.
constexpr double cyclic(double rad_per_ns) { return rad_per_ns / kTwoPi; }

enum class Model { full, rwa, resonant, effective };

inline std::string_view to_string(Model m) {
  switch (m) {
    case Model::full: return "full";
    case Model::rwa: return "rwa";
    case Model::resonant: return "resonant";
    case Model::effective: return "effective";
  }
  return "?";
}

inline Model parse_model(std::string_view s) {
  if (s == "full") return Model::full;
  if (s == "rwa") return Model::rwa;
  if (s == "resonant") return Model::resonant;
  if (s == "effective") return Model::effective;
  throw std::invalid_argument("unknown model '" + std::string(s) + "' (expected full|rwa|resonant|effective)");
}

/// Laboratory parameters, all cyclic frequencies in GHz. Defaults are the
/// RWA-validation operating point with 1 MHz decay rates.
struct PhysicalParams {
  double nu_c = 10.0;
  double nu_1 = 10.1;
  double nu_2 = 9.9;
  double nu_d = 20.0;
  double Omega_d = 36.0;
  double g1_prime = 0.05;
  double g2 = 0.03;
  double kappa = 0.001;
  double gamma_1 = 0.001;
  double gamma_2 = 0.001;
  /// When set, the RWA coupling g1 is taken as given instead of -g1' J_{-1}(xi).
  std::optional<double> g1;

  void validate() const {
    auto finite = [](double v, const char* name) {
      if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + ": must be finite");
    };
    finite(nu_c, "nu_c");
    finite(nu_1, "nu_1");
    finite(nu_2, "nu_2");
    finite(nu_d, "nu_d");
    finite(Omega_d, "Omega_d");
    finite(g1_prime, "g1_prime");
    finite(g2, "g2");
    if (g1) finite(*g1, "g1");
    auto rate = [&](double v, const char* name) {
      finite(v, name);
      if (v < 0.0) throw std::invalid_argument(std::string(name) + ": decay rate must be >= 0, got " + std::to_string(v));
    };
    rate(kappa, "kappa");
    rate(gamma_1, "gamma_1");
    rate(gamma_2, "gamma_2");
    if (nu_d == 0.0 && Omega_d != 0.0) throw std::invalid_argument("nu_d: must be nonzero when Omega_d != 0");
  }
};

/// Derived quantities in rad/ns (xi and r_squeeze dimensionless). Fields that
/// are undefined in the current regime are empty.
struct DerivedParams {
  double xi = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double varpi = 0.0;
  double Delta_1 = 0.0;
  double Delta_2 = 0.0;
  std::optional<double> Omega_1;
  std::optional<double> Omega_2;
  std::optional<double> G;
  std::optional<double> J_eff;
  std::optional<double> r_squeeze;
  std::optional<double> Gamma_eff;
};

inline DerivedParams derive_params(const PhysicalParams& p) {
  if (p.nu_d == 0.0 && p.Omega_d != 0.0) throw std::invalid_argument("nu_d: must be nonzero when Omega_d != 0");
  DerivedParams d;
  d.xi = p.nu_d == 0.0 ? 0.0 : p.Omega_d / p.nu_d;
  d.g1 = p.g1 ? angular(*p.g1) : -angular(p.g1_prime) * bessel_j(-1, d.xi);
  d.g2 = angular(p.g2);
  d.varpi = angular(p.nu_1 - p.nu_d);
  d.Delta_1 = angular(p.nu_c + p.nu_1 - p.nu_d);
  d.Delta_2 = angular(p.nu_c - p.nu_2);

  if (d.Delta_1 != 0.0 && d.Delta_2 != 0.0) {
    d.Omega_1 = -d.g1 * d.g1 / d.Delta_1 + d.varpi;
    d.Omega_2 = -d.g2 * d.g2 / d.Delta_2 + angular(p.nu_2);
    d.G = 0.5 * d.g1 * d.g2 * (1.0 / d.Delta_1 + 1.0 / d.Delta_2);
  }
  if (d.g2 > 0.0 && std::abs(d.g1) <= d.g2) {
    d.J_eff = std::sqrt(d.g2 * d.g2 - d.g1 * d.g1);
    if (p.kappa > 0.0) d.Gamma_eff = 4.0 * *d.J_eff * *d.J_eff / angular(p.kappa);
    if (std::abs(d.g1) < d.g2) d.r_squeeze = std::atanh(d.g1 / d.g2);
  }
  return d;
}

/// Parameters whose derived detunings are exactly (Delta_1, Delta_2) and whose
/// RWA coupling g1 is taken as given. Arguments are cyclic GHz.
inline PhysicalParams params_from_detunings(double nu_c, double nu_d, double Delta_1, double Delta_2, double g1,
                                            double g2, double kappa, double gamma_1, double gamma_2) {
  PhysicalParams p;
  p.nu_c = nu_c;
  p.nu_d = nu_d;
  p.nu_1 = Delta_1 + nu_d - nu_c;
  p.nu_2 = nu_c - Delta_2;
  p.Omega_d = 0.0;
  p.g1_prime = 0.0;
  p.g1 = g1;
  p.g2 = g2;
  p.kappa = kappa;
  p.gamma_1 = gamma_1;
  p.gamma_2 = gamma_2;
  return p;
}

struct JacobiAngerTerm {
  int f = 0;
  double amplitude = 0.0;  // g1' J_f(xi), rad/ns
  double delta_f = 0.0;    // omega_c + omega_1 + f omega_d, rad/ns
};

inline std::vector<JacobiAngerTerm> jacobi_anger_terms(const PhysicalParams& p, int f_min, int f_max) {
  if (!(f_min <= -1 && -1 <= f_max)) throw std::invalid_argument("jacobi_anger_terms: range must contain f = -1");
  const double xi = p.nu_d == 0.0 ? 0.0 : p.Omega_d / p.nu_d;
  std::vector<JacobiAngerTerm> terms;
  terms.reserve(static_cast<std::size_t>(f_max - f_min + 1));
  for (int f = f_min; f <= f_max; ++f) {
    terms.push_back({f, angular(p.g1_prime) * bessel_j(f, xi), angular(p.nu_c + p.nu_1 + f * p.nu_d)});
  }
  return terms;
}

/// Worst-case suppression min_{f != -1} |delta_f| / (g1' |J_f(xi)|) of the
/// sidebands dropped by the rotating-wave reduction. +inf when nothing couples.
inline double rwa_validity(const PhysicalParams& p, int f_min, int f_max) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& t : jacobi_anger_terms(p, f_min, f_max)) {
    if (t.f == -1 || t.amplitude == 0.0) continue;
    worst = std::min(worst, std::abs(t.delta_f) / std::abs(t.amplitude));
  }
  return worst;
}

/// H = 1/2 R^T M(t) R with M(t) = m_static + cos(mod_omega t) m_modulated.
struct QuadraticHamiltonian {
  ModeLayout layout;
  Eigen::MatrixXd m_static;
  Eigen::MatrixXd m_modulated;
  double mod_omega = 0.0;

  explicit QuadraticHamiltonian(ModeLayout l)
      : layout(l),
        m_static(Eigen::MatrixXd::Zero(l.dim(), l.dim())),
        m_modulated(Eigen::MatrixXd::Zero(l.dim(), l.dim())) {}

  [[nodiscard]] bool time_dependent() const { return mod_omega != 0.0 && !m_modulated.isZero(0.0); }

  [[nodiscard]] Eigen::MatrixXd at(double t) const {
    if (!time_dependent()) return m_static;
    return m_static + std::cos(mod_omega * t) * m_modulated;
  }

  /// omega a^dag a on `mode`.
  void add_free(std::size_t mode, double omega) { add_block(m_static, mode, mode, omega * Eigen::Matrix2d::Identity()); }
  /// g (a^dag b + a b^dag) = g (X_a X_b + Y_a Y_b).
  void add_beam_splitter(std::size_t a, std::size_t b, double g) {
    add_cross(m_static, a, b, g * Eigen::Matrix2d::Identity());
  }
  /// g (a^dag b^dag + a b) = g (X_a X_b - Y_a Y_b).
  void add_two_mode_squeeze(std::size_t a, std::size_t b, double g) {
    add_cross(m_static, a, b, g * Eigen::Vector2d(1.0, -1.0).asDiagonal().toDenseMatrix());
  }

 private:
  static void add_block(Eigen::MatrixXd& m, std::size_t a, std::size_t b, const Eigen::Matrix2d& blk) {
    m.block<2, 2>(static_cast<Eigen::Index>(2 * a), static_cast<Eigen::Index>(2 * b)) += blk;
  }
  static void add_cross(Eigen::MatrixXd& m, std::size_t a, std::size_t b, const Eigen::Matrix2d& blk) {
    add_block(m, a, b, blk);
    add_block(m, b, a, blk.transpose());
  }
};

namespace mode {
inline constexpr std::size_t cavity = 0;
inline constexpr std::size_t m1 = 1;
inline constexpr std::size_t m2 = 2;
}  // namespace mode

/// Laboratory-frame Hamiltonian with the magnon-1 frequency modulated by
/// Omega_d cos(omega_d t).
inline QuadraticHamiltonian hamiltonian_full(const PhysicalParams& p) {
  QuadraticHamiltonian h{three_mode_layout()};
  h.add_free(mode::cavity, angular(p.nu_c));
  h.add_free(mode::m1, angular(p.nu_1));
  h.add_free(mode::m2, angular(p.nu_2));
  h.add_two_mode_squeeze(mode::cavity, mode::m1, angular(p.g1_prime));
  h.add_beam_splitter(mode::cavity, mode::m2, angular(p.g2));
  h.m_modulated.block<2, 2>(2, 2) = angular(p.Omega_d) * Eigen::Matrix2d::Identity();
  h.mod_omega = angular(p.nu_d);
  return h;
}

/// Time-independent model with free frequencies (omega_c, varpi, omega_2),
/// squeezing coupling -g1 and beam-splitter coupling g2.
inline QuadraticHamiltonian hamiltonian_rwa(const PhysicalParams& p) {
  const DerivedParams d = derive_params(p);
  QuadraticHamiltonian h{three_mode_layout()};
  h.add_free(mode::cavity, angular(p.nu_c));
  h.add_free(mode::m1, d.varpi);
  h.add_free(mode::m2, angular(p.nu_2));
  h.add_two_mode_squeeze(mode::cavity, mode::m1, -d.g1);
  h.add_beam_splitter(mode::cavity, mode::m2, d.g2);
  return h;
}

/// Interaction-only model at Delta_1 = Delta_2 = 0.
inline QuadraticHamiltonian hamiltonian_resonant(const PhysicalParams& p) {
  const DerivedParams d = derive_params(p);
  QuadraticHamiltonian h{three_mode_layout()};
  h.add_two_mode_squeeze(mode::cavity, mode::m1, -d.g1);
  h.add_beam_splitter(mode::cavity, mode::m2, d.g2);
  return h;
}

/// Two-magnon model with the cavity eliminated (modes: m1, m2).
inline QuadraticHamiltonian hamiltonian_effective(const PhysicalParams& p) {
  const DerivedParams d = derive_params(p);
  if (!d.Omega_1 || !d.Omega_2 || !d.G) {
    throw std::invalid_argument("hamiltonian_effective: requires nonzero detunings Delta_1 and Delta_2");
  }
  QuadraticHamiltonian h{ModeLayout{2}};
  h.add_free(0, *d.Omega_1);
  h.add_free(1, *d.Omega_2);
  h.add_two_mode_squeeze(0, 1, *d.G);
  return h;
}

inline QuadraticHamiltonian hamiltonian(Model m, const PhysicalParams& p) {
  switch (m) {
    case Model::full: return hamiltonian_full(p);
    case Model::rwa: return hamiltonian_rwa(p);
    case Model::resonant: return hamiltonian_resonant(p);
    case Model::effective: return hamiltonian_effective(p);
  }
  throw std::invalid_argument("hamiltonian: unknown model");
}

/// Per-mode amplitude decay rates in rad/ns, in the model's mode order.
inline std::vector<double> decays_for(Model m, const PhysicalParams& p) {
  if (m == Model::effective) return {angular(p.gamma_1), angular(p.gamma_2)};
  return {angular(p.kappa), angular(p.gamma_1), angular(p.gamma_2)};
}

struct DriftMatrix {
  Eigen::MatrixXd a;
};

struct DiffusionMatrix {
  Eigen::MatrixXd d;
};

/// A(t) = constant + cos(omega t) modulated.
struct DriftRule {
  Eigen::MatrixXd constant;
  Eigen::MatrixXd modulated;
  double omega = 0.0;

  [[nodiscard]] Eigen::Index dim() const { return constant.rows(); }
  [[nodiscard]] bool time_dependent() const { return omega != 0.0 && !modulated.isZero(0.0); }
  [[nodiscard]] DriftMatrix at(double t) const {
    if (!time_dependent()) return {constant};
    return {constant + std::cos(omega * t) * modulated};
  }
  /// Upper bound of max |A_ij(t)| over all t.
  [[nodiscard]] double max_abs_entry() const {
    if (!time_dependent()) return constant.cwiseAbs().maxCoeff();
    return (constant.cwiseAbs() + modulated.cwiseAbs()).maxCoeff();
  }
  static DriftRule constant_rule(const DriftMatrix& a) {
    return {a.a, Eigen::MatrixXd::Zero(a.a.rows(), a.a.cols()), 0.0};
  }
};

namespace detail {
inline Eigen::MatrixXd damping(std::span<const double> decays, Eigen::Index dim) {
  if (static_cast<Eigen::Index>(2 * decays.size()) != dim) {
    throw std::invalid_argument("drift: decay list length " + std::to_string(decays.size()) +
                                " does not match " + std::to_string(dim / 2) + " modes");
  }
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t k = 0; k < decays.size(); ++k) {
    if (!(decays[k] >= 0.0)) throw std::invalid_argument("drift: decay rates must be >= 0");
    g(static_cast<Eigen::Index>(2 * k), static_cast<Eigen::Index>(2 * k)) = 0.5 * decays[k];
    g(static_cast<Eigen::Index>(2 * k + 1), static_cast<Eigen::Index>(2 * k + 1)) = 0.5 * decays[k];
  }
  return g;
}
}  // namespace detail

/// A(t) = Omega M(t) - diag(decay/2 per quadrature).
inline DriftMatrix drift_from_hamiltonian(const QuadraticHamiltonian& h, std::span<const double> decays, double t = 0.0) {
  return {symplectic_form(h.layout) * h.at(t) - detail::damping(decays, h.layout.dim())};
}

inline DriftRule drift_rule(const QuadraticHamiltonian& h, std::span<const double> decays) {
  const Eigen::MatrixXd omega = symplectic_form(h.layout);
  DriftRule rule{omega * h.m_static - detail::damping(decays, h.layout.dim()), omega * h.m_modulated, 0.0};
  if (h.time_dependent()) rule.omega = h.mod_omega;
  return rule;
}

/// Vacuum input noise: diag(rate/2, rate/2) per mode.
inline DiffusionMatrix diffusion_matrix(std::span<const double> decays) {
  const auto dim = static_cast<Eigen::Index>(2 * decays.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t k = 0; k < decays.size(); ++k) {
    if (!(decays[k] >= 0.0)) throw std::invalid_argument("diffusion_matrix: decay rates must be >= 0");
    d(static_cast<Eigen::Index>(2 * k), static_cast<Eigen::Index>(2 * k)) = 0.5 * decays[k];
    d(static_cast<Eigen::Index>(2 * k + 1), static_cast<Eigen::Index>(2 * k + 1)) = 0.5 * decays[k];
  }
  return {d};
}

/// Bogoliubov pair alpha = m1 cosh r - m2^dag sinh r, beta = m2 cosh r - m1^dag sinh r
/// with tanh r = g1/g2. `s_matrix` maps (X1, Y1, X2, Y2) to (X_alpha, Y_alpha, X_beta, Y_beta).
struct BogoliubovTransform {
  double r = 0.0;
  Eigen::Matrix4d s_matrix = Eigen::Matrix4d::Identity();
};

inline BogoliubovTransform bogoliubov_transform(double g1, double g2) {
  if (!(g1 >= 0.0 && g1 < g2)) {
    throw std::domain_error("bogoliubov_transform: requires 0 <= g1 < g2 (dark mode undefined otherwise)");
  }
  BogoliubovTransform b;
  b.r = std::atanh(g1 / g2);
  const double c = std::cosh(b.r);
  const double s = std::sinh(b.r);
  b.s_matrix << c, 0, -s, 0,
                0, c, 0, s,
                -s, 0, c, 0,
                0, s, 0, c;
  return b;
}

/// Quadratic form in transformed coordinates R' = S R: M' = S^{-T} M S^{-1}.
inline Eigen::MatrixXd transform_quadratic_form(const Eigen::MatrixXd& m, const Eigen::MatrixXd& s) {
  const Eigen::MatrixXd s_inv = s.inverse();
  return s_inv.transpose() * m * s_inv;
}

/// Bogoliubov matrix acting on the magnon pair of the three-mode layout.
inline Eigen::MatrixXd embed_magnon_transform(const BogoliubovTransform& b) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(6, 6);
  s.bottomRightCorner<4, 4>() = b.s_matrix;
  return s;
}

/// Coefficients of the time-independent three-mode drift, rad/ns.
struct RwaCoefficients {
  double omega_c = 0.0;
  double varpi = 0.0;
  double omega_2 = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double kappa = 0.0;
  double gamma_1 = 0.0;
  double gamma_2 = 0.0;
};

inline RwaCoefficients rwa_coefficients(const PhysicalParams& p) {
  const DerivedParams d = derive_params(p);
  return {angular(p.nu_c), d.varpi, angular(p.nu_2), d.g1, d.g2,
          angular(p.kappa), angular(p.gamma_1), angular(p.gamma_2)};
}

/// Resonant-model coefficients: the same drift with all free frequencies zero.
inline RwaCoefficients resonant_coefficients(const PhysicalParams& p) {
  RwaCoefficients c = rwa_coefficients(p);
  c.omega_c = c.varpi = c.omega_2 = 0.0;
  return c;
}

}  // namespace magnon
