#pragma once

// Deterministic parallel grid evaluation: stability maps, entanglement maps,
// and one-dimensional ratio sweeps.

#include "magnon/dynamics.hpp"
#include "magnon/entanglement.hpp"
#include "magnon/errors.hpp"
#include "magnon/models.hpp"
#include "magnon/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace magnon {

/// Cells with |margin| below this may legitimately disagree between the
/// spectral and Routh-Hurwitz verdicts.
inline constexpr double kBoundaryBand = 1e-9;

enum class Axis { Delta_1, Delta_2, g1, g2, kappa, g1_over_g2 };

inline std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::Delta_1: return "Delta_1";
    case Axis::Delta_2: return "Delta_2";
    case Axis::g1: return "g1";
    case Axis::g2: return "g2";
    case Axis::kappa: return "kappa";
    case Axis::g1_over_g2: return "g1_over_g2";
  }
  return "?";
}

inline Axis parse_axis(std::string_view s) {
  for (Axis a : {Axis::Delta_1, Axis::Delta_2, Axis::g1, Axis::g2, Axis::kappa, Axis::g1_over_g2}) {
    if (s == to_string(a)) return a;
  }
  throw std::invalid_argument("unknown axis '" + std::string(s) +
                              "' (expected Delta_1|Delta_2|g1|g2|kappa|g1_over_g2)");
}

enum class SweepTask { stability, entanglement, both };

inline std::string_view to_string(SweepTask t) {
  switch (t) {
    case SweepTask::stability: return "stability";
    case SweepTask::entanglement: return "entanglement";
    case SweepTask::both: return "both";
  }
  return "?";
}

inline SweepTask parse_task(std::string_view s) {
  if (s == "stability") return SweepTask::stability;
  if (s == "entanglement") return SweepTask::entanglement;
  if (s == "both") return SweepTask::both;
  throw std::invalid_argument("unknown task '" + std::string(s) + "' (expected stability|entanglement|both)");
}

/// Exact linear spacing; the last value is `max` itself.
inline std::vector<double> linspace(double min, double max, std::size_t count) {
  if (count < 2) throw std::invalid_argument("linspace: count must be >= 2");
  std::vector<double> v(count);
  const double span = max - min;
  for (std::size_t i = 0; i < count; ++i) {
    v[i] = min + span * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  v.back() = max;
  return v;
}

struct AxisSpec {
  Axis name = Axis::Delta_1;
  double min = 0.0;
  double max = 1.0;
  std::size_t count = 2;

  void validate() const {
    if (count < 2) throw std::invalid_argument(std::string(to_string(name)) + ": count must be >= 2");
    if (!std::isfinite(min) || !std::isfinite(max)) {
      throw std::invalid_argument(std::string(to_string(name)) + ": bounds must be finite");
    }
  }
  [[nodiscard]] std::vector<double> values() const { return linspace(min, max, count); }
};

/// Non-swept parameters, cyclic GHz. g1 is the RWA coupling given directly.
struct SweepFixed {
  double nu_c = 10.0;
  double nu_d = 20.0;
  double Delta_1 = 0.0;
  double Delta_2 = 0.0;
  double g1 = 0.001;
  double g2 = 0.001;
  double kappa = 0.001;
  double gamma_1 = 0.001;
  double gamma_2 = 0.001;
};

struct GridSpec {
  AxisSpec axis1;
  std::optional<AxisSpec> axis2;
  SweepFixed fixed;
  Model model = Model::rwa;
  SweepTask task = SweepTask::both;

  void validate() const {
    if (model == Model::full) throw std::invalid_argument("model: sweeps support rwa|resonant|effective");
    axis1.validate();
    if (axis2) {
      axis2->validate();
      if (axis2->name == axis1.name) throw std::invalid_argument("axis2: must differ from axis1");
    }
  }
  [[nodiscard]] std::size_t size() const { return axis1.count * (axis2 ? axis2->count : 1); }
};

struct SweepRow {
  double axis1 = 0.0;
  std::optional<double> axis2;
  bool stable = false;
  double margin = 0.0;  // max Re lambda, rad/ns
  std::optional<double> e_cm1;
  std::optional<double> e_cm2;
  std::optional<double> e_m1m2;
  std::optional<std::string> error;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
  Axis axis1 = Axis::Delta_1;
  std::optional<Axis> axis2;
  std::vector<SweepRow> rows;
};

/// Applies one axis value to the fixed assignment. g1_over_g2 is resolved
/// after every other axis so it always scales the final g2.
inline void apply_axis(SweepFixed& f, Axis a, double v) {
  switch (a) {
    case Axis::Delta_1: f.Delta_1 = v; break;
    case Axis::Delta_2: f.Delta_2 = v; break;
    case Axis::g1: f.g1 = v; break;
    case Axis::g2: f.g2 = v; break;
    case Axis::kappa: f.kappa = v; break;
    case Axis::g1_over_g2: break;
  }
}

inline SweepFixed cell_assignment(SweepFixed f, const std::vector<std::pair<Axis, double>>& coords) {
  for (const auto& [a, v] : coords) apply_axis(f, a, v);
  for (const auto& [a, v] : coords) {
    if (a == Axis::g1_over_g2) f.g1 = v * f.g2;
  }
  return f;
}

inline PhysicalParams to_params(const SweepFixed& f) {
  PhysicalParams p =
      params_from_detunings(f.nu_c, f.nu_d, f.Delta_1, f.Delta_2, f.g1, f.g2, f.kappa, f.gamma_1, f.gamma_2);
  p.validate();
  return p;
}

/// Evaluates one cell. Throws VerdictMismatch only on a Routh-Hurwitz/spectral
/// disagreement outside the boundary band; other failures land in `row.error`.
inline SweepRow evaluate_cell(const SweepFixed& f, Model model, SweepTask task) {
  SweepRow row;
  try {
    const PhysicalParams p = to_params(f);
    const QuadraticHamiltonian h = hamiltonian(model, p);
    const std::vector<double> decays = decays_for(model, p);
    const DriftMatrix a = drift_from_hamiltonian(h, decays);
    const StabilityVerdict ev = eigen_stable(a);
    row.stable = ev.stable;
    row.margin = *ev.margin;

    if (model == Model::rwa) {
      const StabilityVerdict rh = routh_hurwitz_stable(rwa_coefficients(p));
      if (rh.stable != ev.stable && std::abs(row.margin) >= kBoundaryBand) {
        throw VerdictMismatch("Routh-Hurwitz and eigenvalue verdicts disagree (margin " + std::to_string(row.margin) +
                             ")");
      }
    }

    if (row.stable && task != SweepTask::stability) {
      const CovarianceMatrix sigma = steady_state(a, diffusion_matrix(decays));
      if (model == Model::effective) {
        row.e_m1m2 = floored_log_negativity(sigma);
      } else {
        const EntanglementReport e = pairwise_entanglement(sigma);
        row.e_cm1 = e.e_cm1;
        row.e_cm2 = e.e_cm2;
        row.e_m1m2 = e.e_m1m2;
      }
    }
  } catch (const VerdictMismatch&) {
    throw;
  } catch (const std::exception& e) {
    row.error = e.what();
    row.e_cm1.reset();
    row.e_cm2.reset();
    row.e_m1m2.reset();
  }
  return row;
}

/// Default degree of parallelism: available hardware threads.
inline unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
/// thrown (lowest index) is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::size_t err_index = n;
  std::exception_ptr err;
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard lock(err_mutex);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  if (err) std::rethrow_exception(err);
}

inline std::string describe_cell(const std::vector<std::pair<Axis, double>>& coords) {
  std::string s;
  for (const auto& [a, v] : coords) {
    if (!s.empty()) s += ", ";
    s += std::string(to_string(a)) + " = " + std::to_string(v);
  }
  return s;
}

/// Row-major over (axis1, axis2): axis2 varies fastest.
inline SweepResult run_sweep(const GridSpec& spec, unsigned jobs = default_jobs()) {
  spec.validate();
  const std::vector<double> v1 = spec.axis1.values();
  const std::vector<double> v2 = spec.axis2 ? spec.axis2->values() : std::vector<double>{};
  const std::size_t n2 = spec.axis2 ? v2.size() : 1;

  SweepResult out;
  out.axis1 = spec.axis1.name;
  if (spec.axis2) out.axis2 = spec.axis2->name;
  out.rows.resize(spec.size());

  parallel_for(out.rows.size(), jobs, [&](std::size_t idx) {
    const std::size_t i = idx / n2;
    const std::size_t j = idx % n2;
    std::vector<std::pair<Axis, double>> coords{{spec.axis1.name, v1[i]}};
    if (spec.axis2) coords.emplace_back(spec.axis2->name, v2[j]);
    SweepRow row;
    try {
      row = evaluate_cell(cell_assignment(spec.fixed, coords), spec.model, spec.task);
    } catch (const VerdictMismatch& e) {
      throw VerdictMismatch(std::string(e.what()) + " at cell (" + describe_cell(coords) + ")");
    }
    row.axis1 = v1[i];
    if (spec.axis2) row.axis2 = v2[j];
    out.rows[idx] = std::move(row);
  });
  return out;
}

/// One E_N(m1, m2) versus g1/g2 curve of the resonant model.
struct RatioCurve {
  double curve_value = 0.0;  // g2 or kappa, cyclic GHz
  std::vector<SweepRow> rows;
  /// Ratio maximizing E_N(m1, m2) among stable rows.
  std::optional<double> argmax_ratio;
  std::optional<double> max_e;
};

struct RatioSweepSpec {
  Axis curve_axis = Axis::g2;  // g2 or kappa
  std::vector<double> curve_values;
  AxisSpec ratio{Axis::g1_over_g2, 0.0, 0.99, 100};
  SweepFixed fixed;

  void validate() const {
    if (curve_axis != Axis::g2 && curve_axis != Axis::kappa) {
      throw std::invalid_argument("curve_axis: must be g2 or kappa");
    }
    if (curve_values.empty()) throw std::invalid_argument("curve_values: must not be empty");
    if (ratio.name != Axis::g1_over_g2) throw std::invalid_argument("ratio: axis must be g1_over_g2");
    ratio.validate();
    if (!(ratio.min >= 0.0 && ratio.max < 1.0)) throw std::invalid_argument("ratio: values must lie in [0, 1)");
  }
};

inline std::vector<RatioCurve> ratio_sweep(const RatioSweepSpec& spec, unsigned jobs = default_jobs()) {
  spec.validate();
  const std::vector<double> ratios = spec.ratio.values();
  std::vector<RatioCurve> curves(spec.curve_values.size());
  for (std::size_t c = 0; c < curves.size(); ++c) {
    curves[c].curve_value = spec.curve_values[c];
    curves[c].rows.resize(ratios.size());
  }
  parallel_for(curves.size() * ratios.size(), jobs, [&](std::size_t idx) {
    const std::size_t c = idx / ratios.size();
    const std::size_t k = idx % ratios.size();
    const std::vector<std::pair<Axis, double>> coords{{spec.curve_axis, spec.curve_values[c]},
                                                      {Axis::g1_over_g2, ratios[k]}};
    SweepRow row = evaluate_cell(cell_assignment(spec.fixed, coords), Model::resonant, SweepTask::both);
    row.axis1 = ratios[k];
    curves[c].rows[k] = std::move(row);
  });
  for (auto& curve : curves) {
    for (const auto& row : curve.rows) {
      if (row.e_m1m2 && (!curve.max_e || *row.e_m1m2 > *curve.max_e)) {
        curve.max_e = row.e_m1m2;
        curve.argmax_ratio = row.axis1;
      }
    }
  }
  return curves;
}

}  // namespace magnon
