#pragma once

// Pairwise entanglement of three-mode steady states, the large-detuning
// closed form, and sideband-cooling figures of merit.

#include "magnon/gaussian.hpp"
#include "magnon/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace magnon {

/// Entanglement below this is reported as exactly zero.
inline constexpr double kEntanglementFloor = 1e-12;

struct EntanglementReport {
  double e_cm1 = 0.0;
  double e_cm2 = 0.0;
  double e_m1m2 = 0.0;
};

inline double floored_log_negativity(const CovarianceMatrix& cm4) {
  const double e = log_negativity(cm4);
  return e < kEntanglementFloor ? 0.0 : e;
}

inline EntanglementReport pairwise_entanglement(const CovarianceMatrix& sigma) {
  if (sigma.n_modes() != 3) throw std::invalid_argument("pairwise_entanglement: expected a three-mode state");
  if (!is_physical(sigma)) throw std::domain_error("pairwise_entanglement: covariance matrix is unphysical");
  return {floored_log_negativity(reduce_two_mode(sigma, mode::cavity, mode::m1)),
          floored_log_negativity(reduce_two_mode(sigma, mode::cavity, mode::m2)),
          floored_log_negativity(reduce_two_mode(sigma, mode::m1, mode::m2))};
}

/// ln(1 + 2G / sqrt((Omega_1 + Omega_2)^2 + gamma^2)) for equal magnon decays gamma.
inline double closed_form_en(double Omega_1, double Omega_2, double G, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("closed_form_en: gamma must be > 0");
  const double s = Omega_1 + Omega_2;
  return std::log1p(2.0 * std::abs(G) / std::sqrt(s * s + gamma * gamma));
}

/// Closed form evaluated at the derived effective-model parameters; requires
/// gamma_1 == gamma_2.
inline double closed_form_en(const PhysicalParams& p) {
  if (p.gamma_1 != p.gamma_2) throw std::invalid_argument("closed_form_en: requires gamma_1 == gamma_2");
  const DerivedParams d = derive_params(p);
  if (!d.Omega_1 || !d.Omega_2 || !d.G) throw std::invalid_argument("closed_form_en: requires nonzero detunings");
  return closed_form_en(*d.Omega_1, *d.Omega_2, *d.G, angular(p.gamma_1));
}

struct CoolingDiagnostics {
  double J_eff = 0.0;      // rad/ns
  double r_squeeze = 0.0;  // dimensionless
  double Gamma_eff = 0.0;  // rad/ns
  double gamma_ratio = 0.0;
};

inline CoolingDiagnostics cooling_diagnostics(const PhysicalParams& p) {
  const DerivedParams d = derive_params(p);
  if (!(std::abs(d.g1) < d.g2)) throw std::domain_error("cooling_diagnostics: requires |g1| < g2");
  if (!(p.kappa > 0.0)) throw std::domain_error("cooling_diagnostics: requires kappa > 0");
  CoolingDiagnostics c;
  c.J_eff = *d.J_eff;
  c.r_squeeze = *d.r_squeeze;
  c.Gamma_eff = *d.Gamma_eff;
  const double gamma_max = angular(std::max(p.gamma_1, p.gamma_2));
  c.gamma_ratio = gamma_max > 0.0 ? c.Gamma_eff / gamma_max : std::numeric_limits<double>::infinity();
  return c;
}

}  // namespace magnon
