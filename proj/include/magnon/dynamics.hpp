#pragma once

// Covariance dynamics d(sigma)/dt = A(t) sigma + sigma A(t)^T + D and its
// steady state A sigma + sigma A^T = -D.

#include "magnon/errors.hpp"
#include "magnon/gaussian.hpp"
#include "magnon/models.hpp"
#include "magnon/stability.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace magnon {

/// Physicality loss beyond this aborts a propagation (step size failure).
inline constexpr double kPropagationPhysicalityAbort = 1e-6;
inline constexpr double kLyapunovResidualTol = 1e-10;
inline constexpr int kLyapunovRefinementRounds = 3;

struct PropagationConfig {
  double t_end = 1000.0;  // ns
  /// Fixed step in ns; 0 selects auto_step.
  double dt = 0.0;
  std::size_t record_every = 1;
  /// Relative Frobenius change per ns regarded as stationary.
  double steady_detect_tol = 1e-8;
  /// Consecutive stationary records required before stopping early.
  std::size_t steady_window = 100;
  bool stop_on_steady = true;
};

/// Largest fixed step allowed for a drift: (2 pi / max|A_ij|) / 20.
inline double max_step(const DriftRule& rule) {
  const double w = rule.max_abs_entry();
  return w > 0.0 ? (kTwoPi / w) / 20.0 : std::numeric_limits<double>::infinity();
}

/// Steps per modulation period used when a modulated drift is propagated
/// with dt = 0. Coarser steps visibly shift the sideband resonance.
inline constexpr int kStepsPerModulationPeriod = 400;

/// Step chosen for dt = 0: the cap, refined to a whole fraction of the
/// modulation period when the drift is time dependent.
inline double auto_step(const DriftRule& rule) {
  const double cap = max_step(rule);
  if (!rule.time_dependent()) return cap;
  const double period = kTwoPi / std::abs(rule.omega);
  const auto per_period = std::max<long long>(kStepsPerModulationPeriod, std::llround(std::ceil(period / cap - 1e-9)));
  return period / static_cast<double>(per_period);
}

struct Trajectory {
  std::vector<double> times;
  std::vector<CovarianceMatrix> cms;
  bool reached_steady = false;
  double dt = 0.0;
  double min_physicality_margin = std::numeric_limits<double>::infinity();

  [[nodiscard]] std::size_t size() const { return times.size(); }
  [[nodiscard]] const CovarianceMatrix& final_state() const { return cms.back(); }

  [[nodiscard]] std::vector<double> populations(std::size_t mode) const {
    std::vector<double> out;
    out.reserve(cms.size());
    for (const auto& cm : cms) out.push_back(mode_population(cm, mode));
    return out;
  }
};

namespace detail {

template <int N>
Trajectory propagate_fixed(const DriftRule& rule, const DiffusionMatrix& diffusion, const CovarianceMatrix& sigma0,
                           const PropagationConfig& cfg, double dt) {
  using Mat = Eigen::Matrix<double, N, N>;
  const Eigen::Index dim = sigma0.dim();
  const Mat a_const = rule.constant;
  const Mat a_mod = rule.time_dependent() ? Mat(rule.modulated) : Mat(Mat::Zero(dim, dim));
  const bool td = rule.time_dependent();
  const double omega = rule.omega;
  const Mat d = diffusion.d;

  auto drift_at = [&](double t) -> Mat { return td ? Mat(a_const + std::cos(omega * t) * a_mod) : a_const; };
  auto rhs = [&](const Mat& a, const Mat& s) -> Mat { return a * s + s * a.transpose() + d; };

  Trajectory traj;
  traj.dt = dt;
  const auto n_steps = static_cast<long long>(std::ceil(cfg.t_end / dt - 1e-9));
  const std::size_t stride = std::max<std::size_t>(cfg.record_every, 1);

  Mat sigma = sigma0.data();
  Mat last_recorded = sigma;
  double last_time = 0.0;
  std::size_t stationary = 0;

  auto record = [&](long long step) {
    const double t = static_cast<double>(step) * dt;
    if (!sigma.allFinite()) {
      throw NumericalError("propagate: non-finite covariance at t = " + std::to_string(t) + " ns");
    }
    CovarianceMatrix cm{Eigen::MatrixXd(sigma)};
    const double margin = physicality_margin(cm);
    if (margin < -kPropagationPhysicalityAbort) {
      throw NumericalError("propagate: physicality margin " + std::to_string(margin) + " at t = " +
                           std::to_string(t) + " ns (step size too large?)");
    }
    traj.min_physicality_margin = std::min(traj.min_physicality_margin, margin);
    if (!traj.times.empty()) {
      const double norm = sigma.norm();
      const double drift = norm > 0.0 ? (sigma - last_recorded).norm() / norm / (t - last_time) : 0.0;
      stationary = drift < cfg.steady_detect_tol ? stationary + 1 : 0;
      if (stationary >= cfg.steady_window) traj.reached_steady = true;
    }
    traj.times.push_back(t);
    traj.cms.push_back(std::move(cm));
    last_recorded = sigma;
    last_time = t;
  };

  record(0);
  for (long long step = 1; step <= n_steps; ++step) {
    const double t = static_cast<double>(step - 1) * dt;
    const Mat a0 = drift_at(t);
    const Mat ah = drift_at(t + 0.5 * dt);
    const Mat a1 = drift_at(t + dt);
    const Mat k1 = rhs(a0, sigma);
    const Mat k2 = rhs(ah, sigma + 0.5 * dt * k1);
    const Mat k3 = rhs(ah, sigma + 0.5 * dt * k2);
    const Mat k4 = rhs(a1, sigma + dt * k3);
    sigma += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    sigma = 0.5 * (sigma + sigma.transpose()).eval();

    if (step % static_cast<long long>(stride) == 0 || step == n_steps) {
      record(step);
      if (traj.reached_steady && cfg.stop_on_steady) break;
    }
  }
  return traj;
}

}  // namespace detail

/// Classical fourth-order Runge-Kutta with fixed step, symmetrizing after
/// every step. A(t) is evaluated analytically at the substage times.
inline Trajectory propagate(const DriftRule& rule, const DiffusionMatrix& diffusion, const CovarianceMatrix& sigma0,
                            const PropagationConfig& cfg) {
  const Eigen::Index dim = sigma0.dim();
  if (rule.constant.rows() != dim || rule.constant.cols() != dim || diffusion.d.rows() != dim ||
      diffusion.d.cols() != dim) {
    throw std::invalid_argument("propagate: drift, diffusion and initial state dimensions disagree");
  }
  if (!is_physical(sigma0)) throw std::invalid_argument("propagate: initial state is unphysical");
  if (!(cfg.t_end > 0.0)) throw std::invalid_argument("propagate: t_end must be positive");
  const double cap = max_step(rule);
  double dt = cfg.dt == 0.0 ? std::min(auto_step(rule), cfg.t_end) : cfg.dt;
  if (!(dt > 0.0)) throw std::invalid_argument("propagate: dt must be positive");
  if (dt > cap * (1.0 + 1e-12)) {
    throw std::invalid_argument("propagate: dt = " + std::to_string(dt) + " ns exceeds the limit " +
                                std::to_string(cap) + " ns set by the fastest drift frequency");
  }
  switch (dim) {
    case 4: return detail::propagate_fixed<4>(rule, diffusion, sigma0, cfg, dt);
    case 6: return detail::propagate_fixed<6>(rule, diffusion, sigma0, cfg, dt);
    default: return detail::propagate_fixed<Eigen::Dynamic>(rule, diffusion, sigma0, cfg, dt);
  }
}

inline double lyapunov_residual(const DriftMatrix& drift, const DiffusionMatrix& diffusion, const CovarianceMatrix& sigma) {
  const Eigen::MatrixXd r = drift.a * sigma.data() + sigma.data() * drift.a.transpose() + diffusion.d;
  const double scale = diffusion.d.norm();
  return scale > 0.0 ? r.norm() / scale : r.norm();
}

/// Solves A sigma + sigma A^T = -D through (I (x) A + A (x) I) vec(sigma) = -vec(D).
inline CovarianceMatrix steady_state(const DriftMatrix& drift, const DiffusionMatrix& diffusion) {
  const Eigen::MatrixXd& a = drift.a;
  const Eigen::Index n = a.rows();
  if (a.cols() != n || diffusion.d.rows() != n || diffusion.d.cols() != n) {
    throw std::invalid_argument("steady_state: drift and diffusion dimensions disagree");
  }
  const StabilityVerdict verdict = eigen_stable(drift);
  if (!verdict.stable) {
    throw NumericalError("steady_state: drift matrix is not Hurwitz (max Re lambda = " +
                         std::to_string(*verdict.margin) + "), steady state undefined");
  }
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      kron.block(i * n, j * n, n, n) = id(i, j) * a + a(i, j) * id;
    }
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(diffusion.d.data(), n * n);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu = kron.partialPivLu();
  Eigen::VectorXd x = lu.solve(rhs);
  // A few rounds of iterative refinement recover digits lost to slow modes.
  for (int round = 0; round < kLyapunovRefinementRounds; ++round) {
    x += lu.solve(rhs - kron * x);
  }
  Eigen::MatrixXd sigma = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  CovarianceMatrix cm{std::move(sigma)};
  const double residual = lyapunov_residual(drift, diffusion, cm);
  if (!(residual < kLyapunovResidualTol)) {
    std::ostringstream msg;
    msg << "steady_state: Lyapunov residual " << std::scientific << residual
        << " exceeds tolerance (near-marginal stability?)";
    throw NumericalError(msg.str());
  }
  return cm;
}

/// Monodromy of x' = A(t) x over one modulation period, integrated with the
/// same RK4 step. Stable iff every Floquet multiplier lies inside the unit circle.
inline double floquet_radius(const DriftRule& rule, double period, double dt) {
  const Eigen::Index n = rule.dim();
  const auto steps = static_cast<long long>(std::llround(period / dt));
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(n, n);
  for (long long s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    const Eigen::MatrixXd a0 = rule.at(t).a, ah = rule.at(t + 0.5 * dt).a, a1 = rule.at(t + dt).a;
    const Eigen::MatrixXd k1 = a0 * x;
    const Eigen::MatrixXd k2 = ah * (x + 0.5 * dt * k1);
    const Eigen::MatrixXd k3 = ah * (x + 0.5 * dt * k2);
    const Eigen::MatrixXd k4 = a1 * (x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(x, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

enum class ComparisonPair { full_vs_rwa, rwa_vs_effective };

struct ObservableDivergence {
  std::string name;
  double sup_relative = 0.0;     // max_t |a - b| / max_t |a|
  double steady_relative = 0.0;  // |a_final - b_final| / |a_final|
  double final_a = 0.0;
  double final_b = 0.0;
};

struct ModelComparison {
  ComparisonPair pair = ComparisonPair::full_vs_rwa;
  Model model_a = Model::full;
  Model model_b = Model::rwa;
  Trajectory a;
  Trajectory b;
  /// (mode in a, mode in b) for each compared population.
  std::vector<std::pair<std::size_t, std::size_t>> modes;
  std::vector<ObservableDivergence> observables;
  double sup_divergence = 0.0;
  double steady_divergence = 0.0;
};

namespace detail {
inline double relative_or_zero(double diff, double scale) {
  if (scale == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / scale;
}
}  // namespace detail

/// Propagates both members of `pair` from the vacuum with identical decays and
/// compares mode populations, which are invariant under the frame changes
/// relating the models.
inline ModelComparison compare_models(const PhysicalParams& p, const PropagationConfig& cfg, ComparisonPair pair) {
  ModelComparison out;
  out.pair = pair;
  if (pair == ComparisonPair::full_vs_rwa) {
    out.model_a = Model::full;
    out.model_b = Model::rwa;
    out.modes = {{mode::cavity, mode::cavity}, {mode::m1, mode::m1}, {mode::m2, mode::m2}};
  } else {
    out.model_a = Model::rwa;
    out.model_b = Model::effective;
    out.modes = {{mode::m1, 0}, {mode::m2, 1}};
  }

  const QuadraticHamiltonian ha = hamiltonian(out.model_a, p);
  const QuadraticHamiltonian hb = hamiltonian(out.model_b, p);
  const std::vector<double> decays_a = decays_for(out.model_a, p);
  const std::vector<double> decays_b = decays_for(out.model_b, p);
  const DriftRule rule_a = drift_rule(ha, decays_a);
  const DriftRule rule_b = drift_rule(hb, decays_b);

  double dt = cfg.dt == 0.0 ? std::min(auto_step(rule_a), auto_step(rule_b)) : cfg.dt;
  std::size_t stride = std::max<std::size_t>(cfg.record_every, 1);
  if (rule_a.time_dependent()) {
    // Whole number of steps per modulation period; records are stroboscopic.
    const double period = kTwoPi / rule_a.omega;
    const auto per_period = static_cast<std::size_t>(std::ceil(period / dt - 1e-9));
    dt = period / static_cast<double>(per_period);
    stride = ((stride + per_period - 1) / per_period) * per_period;
    const double radius = floquet_radius(rule_a, period, dt);
    if (!(radius < 1.0)) {
      throw NumericalError("compare_models: " + std::string(to_string(out.model_a)) +
                           " model is unstable (Floquet radius " + std::to_string(radius) + ")");
    }
  } else if (!eigen_stable(rule_a.at(0.0)).stable) {
    throw NumericalError("compare_models: " + std::string(to_string(out.model_a)) + " model is unstable");
  }
  if (!eigen_stable(rule_b.at(0.0)).stable) {
    throw NumericalError("compare_models: " + std::string(to_string(out.model_b)) + " model is unstable");
  }

  PropagationConfig run = cfg;
  run.dt = dt;
  run.record_every = stride;
  out.a = propagate(rule_a, diffusion_matrix(decays_a), vacuum_cm(ha.layout), run);
  out.b = propagate(rule_b, diffusion_matrix(decays_b), vacuum_cm(hb.layout), run);

  const std::size_t common = std::min(out.a.size(), out.b.size());
  for (const auto& [ma, mb] : out.modes) {
    ObservableDivergence obs;
    obs.name = out.model_b == Model::effective ? "n_m" + std::to_string(mb + 1)
                                                : (ma == mode::cavity ? "n_cavity" : "n_m" + std::to_string(ma));
    const std::vector<double> pa = out.a.populations(ma);
    const std::vector<double> pb = out.b.populations(mb);
    double max_diff = 0.0, max_a = 0.0;
    for (std::size_t k = 0; k < common; ++k) {
      max_diff = std::max(max_diff, std::abs(pa[k] - pb[k]));
      max_a = std::max(max_a, std::abs(pa[k]));
    }
    obs.sup_relative = detail::relative_or_zero(max_diff, max_a);
    obs.final_a = pa.back();
    obs.final_b = pb.back();
    obs.steady_relative = detail::relative_or_zero(std::abs(obs.final_a - obs.final_b), std::abs(obs.final_a));
    out.sup_divergence = std::max(out.sup_divergence, obs.sup_relative);
    out.steady_divergence = std::max(out.steady_divergence, obs.steady_relative);
    out.observables.push_back(std::move(obs));
  }
  return out;
}

}  // namespace magnon
