#pragma once

// Result tables and their CSV / JSON renderings.

#include "cli/config.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace magnon::cli {

using Cell = std::optional<std::variant<std::int64_t, double, std::string>>;

struct Table {
  std::string command;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  /// Trailing key/value facts (divergences, argmax per curve, ...).
  std::vector<std::pair<std::string, json>> summary;

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table: row width does not match header");
    rows.push_back(std::move(row));
  }
};

inline Cell cell(double v) { return v; }
inline Cell cell(bool v) { return std::int64_t{v ? 1 : 0}; }
inline Cell cell(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }

/// 17 significant digits, enough for any double to round-trip.
inline std::string format_double(double v) { return fmt::format("{:.17g}", v); }

inline std::string format_cell(const Cell& c) {
  if (!c) return {};
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else {
          return v;
        }
      },
      *c);
}

inline json cell_json(const Cell& c) {
  if (!c) return nullptr;
  return std::visit([](const auto& v) { return json(v); }, *c);
}

inline std::string summary_text(const json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

inline void write_csv(std::ostream& out, const Table& t, const json& config) {
  out << "# magnon_sim " << t.command << '\n';
  std::istringstream lines(config.dump(2));
  for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
  for (const auto& [k, v] : t.summary) out << "# summary " << k << " = " << summary_text(v) << '\n';
}

inline json table_json(const Table& t, const json& config) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(r));
  }
  json summary = json::object();
  for (const auto& [k, v] : t.summary) summary[k] = v;
  return {{"command", t.command}, {"config", config}, {"columns", t.columns}, {"rows", rows}, {"summary", summary}};
}

inline void write_table(std::ostream& out, const Table& t, const json& config, OutputFormat format) {
  if (format == OutputFormat::csv) {
    write_csv(out, t, config);
  } else {
    out << table_json(t, config).dump(2) << '\n';
  }
}

}  // namespace magnon::cli
