#include "magnon/dynamics.hpp"
#include "magnon/entanglement.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using magnon::angular;
using magnon::CovarianceMatrix;

namespace {

double lyapunov_en_effective(const magnon::PhysicalParams& p) {
  const auto decays = magnon::decays_for(magnon::Model::effective, p);
  const auto a = magnon::drift_from_hamiltonian(magnon::hamiltonian_effective(p), decays);
  return magnon::log_negativity(magnon::steady_state(a, magnon::diffusion_matrix(decays)));
}

}  // namespace

TEST(Pairwise, VacuumIsUnentangled) {
  const auto e = magnon::pairwise_entanglement(magnon::vacuum_cm(magnon::three_mode_layout()));
  EXPECT_EQ(e.e_cm1, 0.0);
  EXPECT_EQ(e.e_cm2, 0.0);
  EXPECT_EQ(e.e_m1m2, 0.0);
}

TEST(Pairwise, SqueezedMagnonPairWithVacuumCavity) {
  const double r = 0.8;
  Eigen::MatrixXd m = 0.5 * Eigen::MatrixXd::Identity(6, 6);
  m.bottomRightCorner<4, 4>() = magnon::two_mode_squeezed_cm(r).data();
  const auto e = magnon::pairwise_entanglement(CovarianceMatrix{m});
  EXPECT_EQ(e.e_cm1, 0.0);
  EXPECT_EQ(e.e_cm2, 0.0);
  EXPECT_NEAR(e.e_m1m2, 2 * r, 1e-12);
  EXPECT_THROW(magnon::pairwise_entanglement(magnon::two_mode_squeezed_cm(r)), std::invalid_argument);
}

TEST(Pairwise, EmbeddedEffectiveSteadyStateNearLnTwoBound) {
  const auto p = magnon::params_from_detunings(10, 20, 0.9, 0.9, 0.03, 0.03, 0.001, 0.001, 0.001);
  const auto decays = magnon::decays_for(magnon::Model::effective, p);
  const auto s = magnon::steady_state(magnon::drift_from_hamiltonian(magnon::hamiltonian_effective(p), decays),
                                      magnon::diffusion_matrix(decays));
  Eigen::MatrixXd m = 0.5 * Eigen::MatrixXd::Identity(6, 6);
  m.bottomRightCorner<4, 4>() = s.data();
  const auto e = magnon::pairwise_entanglement(CovarianceMatrix{m});
  EXPECT_NEAR(e.e_m1m2, std::log(1.894427), 1e-3);
  EXPECT_NEAR(e.e_m1m2, 0.639, 1e-3);
}

TEST(ClosedForm, BasicValuesAndBound) {
  EXPECT_EQ(magnon::closed_form_en(1.0, 2.0, 0.0, 0.1), 0.0);
  EXPECT_THROW(magnon::closed_form_en(1.0, 2.0, 0.1, 0.0), std::invalid_argument);

  const auto p = magnon::params_from_detunings(10, 20, 0.9, 0.9, 0.03, 0.03, 0.001, 0.001, 0.001);
  EXPECT_NEAR(magnon::closed_form_en(p), 0.6390, 1e-3);
  const auto d = magnon::derive_params(p);
  EXPECT_LT(magnon::closed_form_en(p), std::log1p(2 * *d.G / std::abs(*d.Omega_1 + *d.Omega_2)));

  // gamma -> 0 with equal couplings and detunings approaches ln 2.
  double prev = 0.0;
  for (double gamma : {1e-3, 1e-4, 1e-6, 1e-9}) {
    const double e = magnon::closed_form_en(*d.Omega_1, *d.Omega_2, *d.G, angular(gamma));
    EXPECT_GT(e, prev);
    EXPECT_LT(e, std::log(2.0));
    prev = e;
  }
  EXPECT_NEAR(prev, std::log(2.0), 1e-6);
}

TEST(ClosedForm, MatchesLyapunovOnRandomLargeDetuningDraws) {
  std::mt19937_64 rng(101);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    const double d1 = oracle::uniform(rng, 0.3, 1.0), d2 = oracle::uniform(rng, 0.3, 1.0);
    const double g1 = oracle::uniform(rng, 0.0, 0.1) * d1, g2 = oracle::uniform(rng, 0.0, 0.1) * d2;
    const double gamma = oracle::uniform(rng, 1e-4, 0.01);
    const auto p = magnon::params_from_detunings(10, 20, d1, d2, g1, g2, gamma, gamma, gamma);
    const auto decays = magnon::decays_for(magnon::Model::effective, p);
    const auto a = magnon::drift_from_hamiltonian(magnon::hamiltonian_effective(p), decays);
    if (!magnon::eigen_stable(a).stable) continue;
    EXPECT_NEAR(lyapunov_en_effective(p), magnon::closed_form_en(p), 1e-6) << d1 << " " << d2 << " " << g1 << " " << g2;
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(ClosedForm, MaximizedOnEqualCouplings) {
  const double delta = 0.9;
  double best = -1.0, best_g1 = 0.0, best_g2 = 0.0;
  for (int i = 1; i <= 40; ++i) {
    for (int j = 1; j <= 40; ++j) {
      const double g1 = 0.00125 * i, g2 = 0.00125 * j;
      const double e =
          magnon::closed_form_en(magnon::params_from_detunings(10, 20, delta, delta, g1, g2, 0.001, 0.001, 0.001));
      if (e > best) {
        best = e;
        best_g1 = g1;
        best_g2 = g2;
      }
    }
  }
  EXPECT_DOUBLE_EQ(best_g1, best_g2);
  EXPECT_LE(best, std::log(2.0));
}

TEST(ClosedForm, DecreasesWithDetuningAlongDiagonal) {
  double prev = std::numeric_limits<double>::infinity();
  for (double delta = 0.1; delta <= 1.0001; delta += 0.05) {
    const auto p = magnon::params_from_detunings(10, 20, delta, delta, 0.0005, 0.0005, 0.001, 0.001, 0.001);
    const double e = lyapunov_en_effective(p);
    EXPECT_LT(e, prev) << "Delta = " << delta;
    prev = e;
  }
}

TEST(Cooling, DiagnosticsFollowDefinitions) {
  magnon::PhysicalParams p;
  p.g1 = 0.0;
  p.g2 = 0.05;
  p.kappa = 0.005;
  const auto c = magnon::cooling_diagnostics(p);
  EXPECT_NEAR(c.Gamma_eff, angular(2.0), 1e-12);
  EXPECT_NEAR(c.J_eff, angular(0.05), 1e-15);
  EXPECT_EQ(c.r_squeeze, 0.0);
  EXPECT_NEAR(c.gamma_ratio, 2.0 / 0.001, 1e-9);

  double prev_ratio = std::numeric_limits<double>::infinity();
  for (double ratio : {0.5, 0.9, 0.99, 0.999, 0.99999}) {
    p.g1 = ratio * p.g2;
    const auto d = magnon::cooling_diagnostics(p);
    EXPECT_LT(d.gamma_ratio, prev_ratio);
    prev_ratio = d.gamma_ratio;
  }
  EXPECT_LT(prev_ratio, 0.1);

  p.g1 = p.g2;
  EXPECT_THROW(magnon::cooling_diagnostics(p), std::domain_error);
}
