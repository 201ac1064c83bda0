#pragma once

// Run configuration for magnon_sim: JSON in, fully resolved JSON back out.
// Frequencies are cyclic GHz throughout; time is ns.

#include "magnon/dynamics.hpp"
#include "magnon/sweep.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace magnon::cli {

using nlohmann::json;

/// Bad input from the user: unknown key, wrong type, out-of-range value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { csv, json };

struct OutputConfig {
  OutputFormat format = OutputFormat::csv;
  std::string path;  // empty: standard output
};

struct CompareConfig {
  ComparisonPair pair = ComparisonPair::full_vs_rwa;
  /// Relative population divergence allowed before `compare` exits with 3.
  double threshold = 0.1;
};

struct RatioConfig {
  Axis curve_axis = Axis::g2;
  std::vector<double> curve_values{0.01, 0.03, 0.05};
  double ratio_min = 0.0;
  double ratio_max = 0.99;
  std::size_t ratio_count = 100;
};

struct RunConfig {
  PhysicalParams params;
  /// Optional detuning overrides; when set they replace nu_1 / nu_2.
  std::optional<double> Delta_1;
  std::optional<double> Delta_2;
  Model model = Model::rwa;
  PropagationConfig propagation;
  bool evolve_entanglement = false;
  AxisSpec axis1{Axis::Delta_1, -1.0, 1.0, 101};
  std::optional<AxisSpec> axis2 = AxisSpec{Axis::Delta_2, -1.0, 1.0, 101};
  RatioConfig ratio;
  CompareConfig compare;
  OutputConfig output;

  /// Parameters with detuning overrides folded in.
  [[nodiscard]] PhysicalParams physical() const {
    PhysicalParams p = params;
    if (Delta_1) p.nu_1 = *Delta_1 + p.nu_d - p.nu_c;
    if (Delta_2) p.nu_2 = p.nu_c - *Delta_2;
    return p;
  }

  /// Detuning-parametrized assignment used by the sweep commands.
  [[nodiscard]] SweepFixed sweep_fixed() const {
    const PhysicalParams p = physical();
    SweepFixed f;
    f.nu_c = p.nu_c;
    f.nu_d = p.nu_d;
    f.Delta_1 = Delta_1 ? *Delta_1 : p.nu_c + p.nu_1 - p.nu_d;
    f.Delta_2 = Delta_2 ? *Delta_2 : p.nu_c - p.nu_2;
    const double xi = p.nu_d == 0.0 ? 0.0 : p.Omega_d / p.nu_d;
    f.g1 = p.g1 ? *p.g1 : -p.g1_prime * bessel_j(-1, xi);
    f.g2 = p.g2;
    f.kappa = p.kappa;
    f.gamma_1 = p.gamma_1;
    f.gamma_2 = p.gamma_2;
    return f;
  }
};

inline std::string_view to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

inline std::string_view pair_name(ComparisonPair p) {
  return p == ComparisonPair::full_vs_rwa ? "full-rwa" : "rwa-effective";
}

inline ComparisonPair parse_pair(std::string_view s) {
  if (s == "full-rwa") return ComparisonPair::full_vs_rwa;
  if (s == "rwa-effective") return ComparisonPair::rwa_vs_effective;
  throw std::invalid_argument("unknown pair '" + std::string(s) + "' (expected full-rwa|rwa-effective)");
}

namespace detail {

/// Walks one JSON object, rejecting unknown keys and reporting dotted paths.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
  }

  [[nodiscard]] const std::string& path() const { return path_; }

  [[nodiscard]] std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k) && !j_.at(k).is_null();
  }

  void number(const std::string& k, double& out) {
    if (!has(k)) return;
    const json& v = j_.at(k);
    if (!v.is_number()) fail(key(k), "expected a number, got " + v.dump());
    out = v.get<double>();
    if (!std::isfinite(out)) fail(key(k), "must be finite");
  }

  void optional_number(const std::string& k, std::optional<double>& out) {
    if (!j_.contains(k)) return;
    seen_.insert(k);
    if (j_.at(k).is_null()) {
      out.reset();
      return;
    }
    double v = 0.0;
    number(k, v);
    out = v;
  }

  void count(const std::string& k, std::size_t& out) {
    if (!has(k)) return;
    const json& v = j_.at(k);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(key(k), "expected a non-negative integer, got " + v.dump());
    out = v.get<std::size_t>();
  }

  void boolean(const std::string& k, bool& out) {
    if (!has(k)) return;
    const json& v = j_.at(k);
    if (!v.is_boolean()) fail(key(k), "expected true or false, got " + v.dump());
    out = v.get<bool>();
  }

  template <class Parse, class T>
  void enumeration(const std::string& k, T& out, Parse parse) {
    if (!has(k)) return;
    const json& v = j_.at(k);
    if (!v.is_string()) fail(key(k), "expected a string, got " + v.dump());
    try {
      out = parse(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      fail(key(k), e.what());
    }
  }

  void text(const std::string& k, std::string& out) {
    if (!has(k)) return;
    const json& v = j_.at(k);
    if (!v.is_string()) fail(key(k), "expected a string, got " + v.dump());
    out = v.get<std::string>();
  }

  Reader child(const std::string& k) {
    seen_.insert(k);
    static const json empty = json::object();
    return Reader(j_.contains(k) && !j_.at(k).is_null() ? j_.at(k) : empty, key(k));
  }

  const json& raw(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail(key(k), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void read_axis(Reader r, AxisSpec& a) {
  r.enumeration("name", a.name, parse_axis);
  r.number("min", a.min);
  r.number("max", a.max);
  r.count("count", a.count);
  r.finish();
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    Reader::fail(r.path(), e.what());
  }
}

inline json axis_json(const AxisSpec& a) {
  return {{"name", std::string(to_string(a.name))}, {"min", a.min}, {"max", a.max}, {"count", a.count}};
}

}  // namespace detail

inline RunConfig from_json(const json& j) {
  RunConfig c;
  detail::Reader top(j, "");

  {
    auto r = top.child("params");
    PhysicalParams& p = c.params;
    r.number("nu_c", p.nu_c);
    r.number("nu_1", p.nu_1);
    r.number("nu_2", p.nu_2);
    r.number("nu_d", p.nu_d);
    r.number("Omega_d", p.Omega_d);
    r.number("g1_prime", p.g1_prime);
    r.optional_number("g1", p.g1);
    r.number("g2", p.g2);
    r.number("kappa", p.kappa);
    r.number("gamma_1", p.gamma_1);
    r.number("gamma_2", p.gamma_2);
    r.optional_number("Delta_1", c.Delta_1);
    r.optional_number("Delta_2", c.Delta_2);
    r.finish();
    try {
      c.physical().validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("params." + std::string(e.what()));
    }
  }

  top.enumeration("model", c.model, parse_model);

  {
    auto r = top.child("propagation");
    PropagationConfig& pc = c.propagation;
    r.number("t_end", pc.t_end);
    r.number("dt", pc.dt);
    r.count("record_every", pc.record_every);
    r.number("steady_tol", pc.steady_detect_tol);
    r.count("steady_window", pc.steady_window);
    r.boolean("stop_on_steady", pc.stop_on_steady);
    r.finish();
    if (!(pc.t_end > 0.0)) detail::Reader::fail("propagation.t_end", "must be > 0");
    if (pc.dt < 0.0) detail::Reader::fail("propagation.dt", "must be >= 0 (0 selects the stability cap)");
    if (pc.record_every == 0) detail::Reader::fail("propagation.record_every", "must be >= 1");
    if (!(pc.steady_detect_tol > 0.0)) detail::Reader::fail("propagation.steady_tol", "must be > 0");
    if (pc.steady_window == 0) detail::Reader::fail("propagation.steady_window", "must be >= 1");
  }

  {
    auto r = top.child("evolve");
    r.boolean("entanglement", c.evolve_entanglement);
    r.finish();
  }

  {
    auto r = top.child("grid");
    detail::read_axis(r.child("axis1"), c.axis1);
    if (r.has("axis2")) {
      if (!c.axis2) c.axis2 = AxisSpec{};
      detail::read_axis(r.child("axis2"), *c.axis2);
    } else if (j.contains("grid") && j.at("grid").contains("axis2")) {
      c.axis2.reset();
    }
    r.finish();
    if (c.axis2 && c.axis2->name == c.axis1.name) detail::Reader::fail("grid.axis2.name", "must differ from axis1");
  }

  {
    auto r = top.child("ratio_sweep");
    RatioConfig& rc = c.ratio;
    r.enumeration("curve_axis", rc.curve_axis, parse_axis);
    if (r.has("curve_values")) {
      const json& v = r.raw("curve_values");
      if (!v.is_array() || v.empty()) detail::Reader::fail("ratio_sweep.curve_values", "expected a non-empty array");
      rc.curve_values.clear();
      for (const auto& x : v) {
        if (!x.is_number()) detail::Reader::fail("ratio_sweep.curve_values", "expected numbers, got " + x.dump());
        rc.curve_values.push_back(x.get<double>());
      }
    }
    r.number("ratio_min", rc.ratio_min);
    r.number("ratio_max", rc.ratio_max);
    r.count("ratio_count", rc.ratio_count);
    r.finish();
    if (rc.curve_axis != Axis::g2 && rc.curve_axis != Axis::kappa) {
      detail::Reader::fail("ratio_sweep.curve_axis", "must be g2 or kappa");
    }
    if (!(rc.ratio_min >= 0.0 && rc.ratio_max < 1.0 && rc.ratio_min <= rc.ratio_max)) {
      detail::Reader::fail("ratio_sweep.ratio_max", "ratios must satisfy 0 <= ratio_min <= ratio_max < 1");
    }
    if (rc.ratio_count < 2) detail::Reader::fail("ratio_sweep.ratio_count", "must be >= 2");
    for (double v : rc.curve_values) {
      if (!(v > 0.0)) detail::Reader::fail("ratio_sweep.curve_values", "values must be > 0");
    }
  }

  {
    auto r = top.child("compare");
    r.enumeration("pair", c.compare.pair, parse_pair);
    r.number("threshold", c.compare.threshold);
    r.finish();
    if (!(c.compare.threshold > 0.0)) detail::Reader::fail("compare.threshold", "must be > 0");
  }

  {
    auto r = top.child("output");
    r.enumeration("format", c.output.format, [](const std::string& s) {
      if (s == "csv") return OutputFormat::csv;
      if (s == "json") return OutputFormat::json;
      throw std::invalid_argument("unknown format '" + s + "' (expected csv|json)");
    });
    r.text("path", c.output.path);
    r.finish();
  }

  top.finish();
  return c;
}

/// Every field, defaults included. Output paths and job counts are left out so
/// that identical runs produce identical files.
inline json to_json(const RunConfig& c) {
  const PhysicalParams& p = c.params;
  json params = {{"nu_c", p.nu_c},         {"nu_1", p.nu_1},   {"nu_2", p.nu_2},
                 {"nu_d", p.nu_d},         {"Omega_d", p.Omega_d}, {"g1_prime", p.g1_prime},
                 {"g1", nullptr},          {"g2", p.g2},       {"kappa", p.kappa},
                 {"gamma_1", p.gamma_1},   {"gamma_2", p.gamma_2}, {"Delta_1", nullptr},
                 {"Delta_2", nullptr}};
  if (p.g1) params["g1"] = *p.g1;
  if (c.Delta_1) params["Delta_1"] = *c.Delta_1;
  if (c.Delta_2) params["Delta_2"] = *c.Delta_2;
  json grid = {{"axis1", detail::axis_json(c.axis1)}, {"axis2", nullptr}};
  if (c.axis2) grid["axis2"] = detail::axis_json(*c.axis2);
  const PropagationConfig& pc = c.propagation;
  return {
      {"params", params},
      {"model", std::string(to_string(c.model))},
      {"propagation",
       {{"t_end", pc.t_end},
        {"dt", pc.dt},
        {"record_every", pc.record_every},
        {"steady_tol", pc.steady_detect_tol},
        {"steady_window", pc.steady_window},
        {"stop_on_steady", pc.stop_on_steady}}},
      {"evolve", {{"entanglement", c.evolve_entanglement}}},
      {"grid", grid},
      {"ratio_sweep",
       {{"curve_axis", std::string(to_string(c.ratio.curve_axis))},
        {"curve_values", c.ratio.curve_values},
        {"ratio_min", c.ratio.ratio_min},
        {"ratio_max", c.ratio.ratio_max},
        {"ratio_count", c.ratio.ratio_count}}},
      {"compare", {{"pair", std::string(pair_name(c.compare.pair))}, {"threshold", c.compare.threshold}}},
      {"output", {{"format", std::string(to_string(c.output.format))}}},
  };
}

/// Parses the right-hand side of `--set key=value`: JSON when it parses,
/// otherwise a bare string.
inline json parse_override_value(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) return json(text);
  return v;
}

/// Applies one dotted-key override, creating intermediate objects.
inline void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set " + assignment + ": expected key=value");
  const std::string key = assignment.substr(0, eq);
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--set " + assignment + ": empty key component");
    if (!node->is_object()) throw ConfigError("--set " + key + ": '" + part + "' is not inside an object");
    if (dot == std::string::npos) {
      (*node)[part] = parse_override_value(assignment.substr(eq + 1));
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

inline json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  json j = json::parse(in, nullptr, false, true);
  if (j.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");
  if (!j.is_object()) throw ConfigError(path.string() + ": top level must be an object");
  return j;
}

/// Directory holding the shipped presets. MAGNON_PRESET_DIR in the environment
/// wins over the build-time location.
inline std::filesystem::path preset_dir() {
  if (const char* env = std::getenv("MAGNON_PRESET_DIR"); env && *env) return env;
#ifdef MAGNON_DEFAULT_PRESET_DIR
  return MAGNON_DEFAULT_PRESET_DIR;
#else
  return "presets";
#endif
}

inline json load_preset(const std::string& name) {
  if (name.empty() || name.find('/') != std::string::npos || name.find('\\') != std::string::npos) {
    throw ConfigError("--preset " + name + ": expected a bare preset name such as fig2");
  }
  const auto path = preset_dir() / (name + ".json");
  if (!std::filesystem::exists(path)) throw ConfigError("--preset " + name + ": no such preset in " + preset_dir().string());
  return load_json_file(path);
}

}  // namespace magnon::cli
