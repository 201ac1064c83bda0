#pragma once

// magnon_sim command dispatch. `run` is the whole program minus main(), so the
// test suite can drive it with in-memory streams.

#include "cli/config.hpp"
#include "cli/table.hpp"

#include "magnon/dynamics.hpp"
#include "magnon/entanglement.hpp"
#include "magnon/sweep.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace magnon::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Sideband window scanned by the `params` RWA validity report.
inline constexpr int kValidityFMin = -10;
inline constexpr int kValidityFMax = 10;

struct Invocation {
  std::string command;
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::vector<std::string> overrides;
  std::optional<std::string> output;
  std::optional<std::string> format;
  std::optional<unsigned> jobs;
  std::optional<std::string> pair;
  bool entanglement = false;
};

inline json resolve_json(const Invocation& inv) {
  json j = json::object();
  if (inv.preset) j = load_preset(*inv.preset);
  if (inv.config_path) j.merge_patch(load_json_file(*inv.config_path));
  for (const auto& o : inv.overrides) apply_override(j, o);
  if (inv.output) j["output"]["path"] = *inv.output;
  if (inv.format) j["output"]["format"] = *inv.format;
  if (inv.pair) j["compare"]["pair"] = *inv.pair;
  if (inv.entanglement) j["evolve"]["entanglement"] = true;
  return j;
}

inline unsigned resolve_jobs(const Invocation& inv) {
  if (inv.jobs) {
    if (*inv.jobs == 0) throw ConfigError("--jobs: must be >= 1");
    return *inv.jobs;
  }
  if (const char* env = std::getenv("MAGNON_SIM_JOBS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError(std::string("MAGNON_SIM_JOBS: expected a positive integer, got '") + env + "'");
    return static_cast<unsigned>(v);
  }
  return default_jobs();
}

namespace commands {

inline Table params(const RunConfig& c) {
  Table t{"params", {"quantity", "cyclic_GHz", "rad_per_ns", "dimensionless"}, {}, {}};
  const PhysicalParams p = c.physical();
  const DerivedParams d = derive_params(p);
  auto freq = [&](const char* name, std::optional<double> rad) {
    t.add_row({std::string(name), rad ? Cell{cyclic(*rad)} : Cell{}, cell(rad), Cell{}});
  };
  auto pure = [&](const char* name, std::optional<double> v) {
    t.add_row({std::string(name), Cell{}, Cell{}, v && std::isfinite(*v) ? Cell{*v} : Cell{}});
  };
  pure("xi", d.xi);
  freq("g1", d.g1);
  freq("g2", d.g2);
  freq("varpi", d.varpi);
  freq("Delta_1", d.Delta_1);
  freq("Delta_2", d.Delta_2);
  freq("Omega_1", d.Omega_1);
  freq("Omega_2", d.Omega_2);
  freq("G", d.G);
  freq("J", d.J_eff);
  pure("r", d.r_squeeze);
  freq("Gamma", d.Gamma_eff);
  pure("rwa_validity", rwa_validity(p, kValidityFMin, kValidityFMax));
  t.summary.emplace_back("rwa_validity_f_range", fmt::format("[{}, {}]", kValidityFMin, kValidityFMax));
  return t;
}

inline GridSpec grid_spec(const RunConfig& c, SweepTask task) {
  if (c.model == Model::full) throw ConfigError("model: sweeps support rwa|resonant|effective, got full");
  GridSpec s;
  s.axis1 = c.axis1;
  s.axis2 = c.axis2;
  s.fixed = c.sweep_fixed();
  s.model = c.model;
  s.task = task;
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  return s;
}

inline void report_cell_errors(const SweepResult& r, std::ostream& err) {
  for (const auto& row : r.rows) {
    if (!row.error) continue;
    err << "warning: cell (" << to_string(r.axis1) << " = " << format_double(row.axis1);
    if (r.axis2) err << ", " << to_string(*r.axis2) << " = " << format_double(*row.axis2);
    err << "): " << *row.error << '\n';
  }
}

inline void sweep_summary(Table& t, const SweepResult& r) {
  std::size_t stable = 0, failed = 0;
  for (const auto& row : r.rows) {
    stable += row.stable;
    failed += row.error.has_value();
  }
  t.summary.emplace_back("axis1", std::string(to_string(r.axis1)));
  t.summary.emplace_back("axis2", r.axis2 ? json(std::string(to_string(*r.axis2))) : json(nullptr));
  t.summary.emplace_back("cells", r.rows.size());
  t.summary.emplace_back("stable_cells", stable);
  t.summary.emplace_back("failed_cells", failed);
}

inline Table stability_map(const RunConfig& c, unsigned jobs, std::ostream& err) {
  const SweepResult r = run_sweep(grid_spec(c, SweepTask::stability), jobs);
  report_cell_errors(r, err);
  Table t{"stability-map", {"axis1", "axis2", "stable", "margin"}, {}, {}};
  for (const auto& row : r.rows) t.add_row({row.axis1, cell(row.axis2), cell(row.stable), row.margin});
  sweep_summary(t, r);
  return t;
}

inline Table ent_map(const RunConfig& c, unsigned jobs, std::ostream& err) {
  const SweepResult r = run_sweep(grid_spec(c, SweepTask::both), jobs);
  report_cell_errors(r, err);
  Table t{"ent-map", {"axis1", "axis2", "stable", "E_c_m1", "E_c_m2", "E_m1_m2"}, {}, {}};
  const SweepRow* best = nullptr;
  for (const auto& row : r.rows) {
    t.add_row({row.axis1, cell(row.axis2), cell(row.stable), cell(row.e_cm1), cell(row.e_cm2), cell(row.e_m1m2)});
    if (row.e_m1m2 && (!best || *row.e_m1m2 > *best->e_m1m2)) best = &row;
  }
  sweep_summary(t, r);
  if (best) {
    t.summary.emplace_back("max_E_m1_m2", *best->e_m1m2);
    t.summary.emplace_back("argmax_axis1", best->axis1);
    t.summary.emplace_back("argmax_axis2", best->axis2 ? json(*best->axis2) : json(nullptr));
  }
  return t;
}

/// Pairwise E_N columns for one recorded state; 2-mode states carry only m1-m2.
inline std::vector<Cell> entanglement_cells(const CovarianceMatrix& cm) {
  try {
    if (cm.layout().n_modes == 2) return {Cell{}, Cell{}, Cell{floored_log_negativity(cm)}};
    const EntanglementReport e = pairwise_entanglement(cm);
    return {Cell{e.e_cm1}, Cell{e.e_cm2}, Cell{e.e_m1m2}};
  } catch (const std::invalid_argument& e) {
    throw NumericalError(std::string("entanglement of a propagated state: ") + e.what());
  }
}

/// Population columns (cavity, m1, m2) for a state of either layout.
inline std::vector<Cell> population_cells(const CovarianceMatrix& cm) {
  if (cm.layout().n_modes == 2) return {Cell{}, Cell{mode_population(cm, 0)}, Cell{mode_population(cm, 1)}};
  return {Cell{mode_population(cm, mode::cavity)}, Cell{mode_population(cm, mode::m1)},
          Cell{mode_population(cm, mode::m2)}};
}

inline Table evolve(const RunConfig& c) {
  const PhysicalParams p = c.physical();
  const QuadraticHamiltonian h = [&] {
    try {
      return hamiltonian(c.model, p);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("model " + std::string(to_string(c.model)) + ": " + e.what());
    }
  }();
  const std::vector<double> decays = decays_for(c.model, p);
  const DriftRule rule = drift_rule(h, decays);
  Trajectory traj;
  try {
    traj = propagate(rule, diffusion_matrix(decays), vacuum_cm(h.layout), c.propagation);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("propagation: ") + e.what());
  }

  Table t{"evolve", {"t_ns", "n_cavity", "n_m1", "n_m2"}, {}, {}};
  if (c.evolve_entanglement) t.columns.insert(t.columns.end(), {"E_c_m1", "E_c_m2", "E_m1_m2"});
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::vector<Cell> row{traj.times[k]};
    for (auto& x : population_cells(traj.cms[k])) row.push_back(std::move(x));
    if (c.evolve_entanglement) {
      for (auto& x : entanglement_cells(traj.cms[k])) row.push_back(std::move(x));
    }
    t.add_row(std::move(row));
  }
  t.summary.emplace_back("model", std::string(to_string(c.model)));
  t.summary.emplace_back("dt_ns", traj.dt);
  t.summary.emplace_back("records", traj.size());
  t.summary.emplace_back("reached_steady", traj.reached_steady);
  t.summary.emplace_back("min_physicality_margin", traj.min_physicality_margin);
  return t;
}

inline Table compare(const RunConfig& c) {
  ModelComparison cmp;
  try {
    cmp = compare_models(c.physical(), c.propagation, c.compare.pair);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("compare: ") + e.what());
  }
  Table t{"compare", {"t_ns", "n_cavity", "n_m1", "n_m2", "n_cavity_b", "n_m1_b", "n_m2_b"}, {}, {}};
  const std::size_t rows = std::max(cmp.a.size(), cmp.b.size());
  for (std::size_t k = 0; k < rows; ++k) {
    std::vector<Cell> row{k < cmp.a.size() ? cmp.a.times[k] : cmp.b.times[k]};
    for (const Trajectory* tr : {&cmp.a, &cmp.b}) {
      if (k < tr->size()) {
        for (auto& x : population_cells(tr->cms[k])) row.push_back(std::move(x));
      } else {
        row.insert(row.end(), 3, Cell{});
      }
    }
    t.add_row(std::move(row));
  }

  const bool steady_metric = c.compare.pair == ComparisonPair::full_vs_rwa;
  const double divergence = steady_metric ? cmp.steady_divergence : cmp.sup_divergence;
  const bool reached = !steady_metric || (cmp.a.reached_steady && cmp.b.reached_steady);
  t.summary.emplace_back("pair", std::string(pair_name(c.compare.pair)));
  t.summary.emplace_back("model_a", std::string(to_string(cmp.model_a)));
  t.summary.emplace_back("model_b", std::string(to_string(cmp.model_b)));
  t.summary.emplace_back("dt_ns", cmp.a.dt);
  t.summary.emplace_back("reached_steady_a", cmp.a.reached_steady);
  t.summary.emplace_back("reached_steady_b", cmp.b.reached_steady);
  for (const auto& o : cmp.observables) {
    t.summary.emplace_back(o.name + ".sup_relative", o.sup_relative);
    t.summary.emplace_back(o.name + ".steady_relative", o.steady_relative);
    t.summary.emplace_back(o.name + ".final_a", o.final_a);
    t.summary.emplace_back(o.name + ".final_b", o.final_b);
  }
  t.summary.emplace_back("metric", steady_metric ? "steady_relative" : "sup_relative");
  t.summary.emplace_back("divergence", divergence);
  t.summary.emplace_back("threshold", c.compare.threshold);
  t.summary.emplace_back("within_threshold", reached && divergence < c.compare.threshold);
  return t;
}

inline Table ratio_sweep_table(const RunConfig& c, unsigned jobs) {
  RatioSweepSpec s;
  s.curve_axis = c.ratio.curve_axis;
  s.curve_values = c.ratio.curve_values;
  s.ratio = {Axis::g1_over_g2, c.ratio.ratio_min, c.ratio.ratio_max, c.ratio.ratio_count};
  s.fixed = c.sweep_fixed();
  std::vector<RatioCurve> curves;
  try {
    curves = ratio_sweep(s, jobs);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("ratio_sweep: ") + e.what());
  }
  Table t{"ratio-sweep", {"curve_id", "ratio", "E_m1_m2"}, {}, {}};
  for (const auto& curve : curves) {
    for (const auto& row : curve.rows) t.add_row({curve.curve_value, row.axis1, cell(row.e_m1m2)});
  }
  t.summary.emplace_back("curve_axis", std::string(to_string(s.curve_axis)));
  for (const auto& curve : curves) {
    const std::string id = format_double(curve.curve_value);
    t.summary.emplace_back("argmax_ratio[" + id + "]", curve.argmax_ratio ? json(*curve.argmax_ratio) : json(nullptr));
    t.summary.emplace_back("max_E_m1_m2[" + id + "]", curve.max_e ? json(*curve.max_e) : json(nullptr));
  }
  return t;
}

}  // namespace commands

/// Executes one command. Table goes to --output when given, else to `out`;
/// diagnostics and the human summary go to `err` / `out` respectively.
inline int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig c = from_json(resolve_json(inv));
    const unsigned jobs = resolve_jobs(inv);
    Table t;
    if (inv.command == "params") {
      t = commands::params(c);
    } else if (inv.command == "stability-map") {
      t = commands::stability_map(c, jobs, err);
    } else if (inv.command == "ent-map") {
      t = commands::ent_map(c, jobs, err);
    } else if (inv.command == "evolve") {
      t = commands::evolve(c);
    } else if (inv.command == "compare") {
      t = commands::compare(c);
    } else if (inv.command == "ratio-sweep") {
      t = commands::ratio_sweep_table(c, jobs);
    } else {
      throw ConfigError("unknown command '" + inv.command + "'");
    }

    const json resolved = to_json(c);
    if (c.output.path.empty()) {
      write_table(out, t, resolved, c.output.format);
    } else {
      std::ofstream file(c.output.path, std::ios::binary);
      if (!file) throw ConfigError("output.path: cannot open '" + c.output.path + "' for writing");
      write_table(file, t, resolved, c.output.format);
      file.close();
      if (!file) throw ConfigError("output.path: write to '" + c.output.path + "' failed");
      out << inv.command << ": " << t.rows.size() << " rows written to " << c.output.path << '\n';
      for (const auto& [k, v] : t.summary) out << "  " << k << " = " << summary_text(v) << '\n';
    }

    if (inv.command == "compare") {
      for (const auto& [k, v] : t.summary) {
        if (k == "within_threshold" && !v.get<bool>()) {
          err << "error: compare: population divergence exceeds threshold " << format_double(c.compare.threshold)
              << " or a model did not reach steady state\n";
          return kExitNumerical;
        }
      }
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Gaussian covariance simulations of a driven cavity coupled to two magnon modes", "magnon_sim"};
  app.require_subcommand(1);
  app.fallthrough();

  Invocation inv;
  app.add_option("--config", inv.config_path, "JSON config file");
  app.add_option("--preset", inv.preset, "Shipped preset name (fig2 ... fig7b)");
  app.add_option("--set", inv.overrides, "Override a dotted key, e.g. params.kappa=0.005")
      ->expected(1)
      ->take_all();
  app.add_option("--output", inv.output, "Write the table here instead of standard output");
  app.add_option("--format", inv.format, "csv or json");
  app.add_option("--jobs", inv.jobs, "Worker threads for sweeps (default MAGNON_SIM_JOBS or all cores)");

  app.add_subcommand("params", "Derived-parameter report");
  app.add_subcommand("stability-map", "Stability verdict and margin over a 1-D or 2-D grid");
  app.add_subcommand("ent-map", "Steady-state pairwise entanglement over a grid");
  auto* evolve = app.add_subcommand("evolve", "Mode populations over time from the vacuum");
  evolve->add_flag("--entanglement", inv.entanglement, "Add pairwise log-negativity columns");
  auto* compare = app.add_subcommand("compare", "Populations of two models side by side");
  compare->add_option("--pair", inv.pair, "full-rwa or rwa-effective");
  app.add_subcommand("ratio-sweep", "E_N(m1, m2) against g1/g2 for several g2 or kappa values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  for (const auto* sub : app.get_subcommands()) inv.command = sub->get_name();
  return execute(inv, out, err);
}

}  // namespace magnon::cli
