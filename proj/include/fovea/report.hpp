#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "fovea/config.hpp"
#include "fovea/error.hpp"

namespace fovea {

/// One summary statistic, optionally with a 95% bootstrap interval.
struct Aggregate {
  std::string group;
  std::string metric;
  double value = 0.0;
  std::optional<double> lo;
  std::optional<double> hi;
  long n = 0;
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct MetricsReport {
  std::string kind;
  nlohmann::ordered_json config;  // echo of the ExperimentSpec
  std::string engine_version{kEngineVersion};
  std::string cost_axis;          // label of the cost proxy, when the report has one
  std::vector<std::string> columns;
  std::vector<nlohmann::ordered_json> rows;
  std::vector<Aggregate> aggregates;
  std::vector<Check> checks;
  double wall_seconds = 0.0;  // not written to files, so outputs stay byte-stable

  bool all_passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }

  const Aggregate* find(std::string_view group, std::string_view metric) const {
    for (const auto& a : aggregates) {
      if (a.group == group && a.metric == metric) return &a;
    }
    return nullptr;
  }

  double value(std::string_view group, std::string_view metric) const {
    const Aggregate* a = find(group, metric);
    if (!a) throw MisuseError("no aggregate " + std::string(group) + "/" + std::string(metric));
    return a->value;
  }

  const Check* check(std::string_view name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

namespace detail {

inline std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_cell(const nlohmann::ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return csv_escape(v.get<std::string>());
  if (v.is_number_float()) return fmt("%.17g", v.get<double>());
  return csv_escape(v.dump());
}

/// Writes to a sibling temporary file and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string(), "cannot open output file");
    out << content;
    out.flush();
    if (!out) throw IoError(path.string(), "write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(path.string(), "cannot rename into place: " + ec.message());
}

}  // namespace detail

inline std::string render_table(const MetricsReport& r) {
  std::ostringstream out;
  out << "experiment: " << r.kind << "\n";
  out << "engine: " << r.engine_version << "\n";
  if (!r.cost_axis.empty()) out << "cost axis: " << r.cost_axis << "\n";
  out << "rows: " << r.rows.size() << "\n\n";
  std::size_t gw = 5, mw = 6;
  for (const auto& a : r.aggregates) {
    gw = std::max(gw, a.group.size());
    mw = std::max(mw, a.metric.size());
  }
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
  out << pad("group", gw) << "  " << pad("metric", mw) << "  " << pad("value", 14) << "  "
      << pad("ci_lo", 14) << "  " << pad("ci_hi", 14) << "  n\n";
  for (const auto& a : r.aggregates) {
    out << pad(a.group, gw) << "  " << pad(a.metric, mw) << "  "
        << pad(detail::fmt("%.6f", a.value), 14) << "  "
        << pad(a.lo ? detail::fmt("%.6f", *a.lo) : "-", 14) << "  "
        << pad(a.hi ? detail::fmt("%.6f", *a.hi) : "-", 14) << "  " << a.n << "\n";
  }
  if (!r.checks.empty()) {
    out << "\nchecks:\n";
    for (const auto& c : r.checks) {
      out << "  " << (c.passed ? "PASS" : "FAIL") << "  " << c.name << ": " << c.detail << "\n";
    }
  }
  return out.str();
}

inline std::string render_rows_csv(const MetricsReport& r) {
  std::ostringstream out;
  for (std::size_t i = 0; i < r.columns.size(); ++i) {
    out << (i ? "," : "") << detail::csv_escape(r.columns[i]);
  }
  out << "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
      if (i) out << ",";
      if (row.contains(r.columns[i])) out << detail::csv_cell(row.at(r.columns[i]));
    }
    out << "\n";
  }
  return out.str();
}

inline std::string render_summary_csv(const MetricsReport& r) {
  std::ostringstream out;
  out << "group,metric,value,ci_lo,ci_hi,n\n";
  for (const auto& a : r.aggregates) {
    out << detail::csv_escape(a.group) << "," << detail::csv_escape(a.metric) << ","
        << detail::fmt("%.17g", a.value) << "," << (a.lo ? detail::fmt("%.17g", *a.lo) : "") << ","
        << (a.hi ? detail::fmt("%.17g", *a.hi) : "") << "," << a.n << "\n";
  }
  return out.str();
}

inline nlohmann::ordered_json summary_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["kind"] = r.kind;
  j["engine_version"] = r.engine_version;
  if (!r.cost_axis.empty()) j["cost_axis"] = r.cost_axis;
  j["config"] = r.config;
  auto& aggs = j["aggregates"] = nlohmann::ordered_json::array();
  for (const auto& a : r.aggregates) {
    nlohmann::ordered_json x{{"group", a.group}, {"metric", a.metric}, {"value", a.value}};
    if (a.lo) x["ci_lo"] = *a.lo;
    if (a.hi) x["ci_hi"] = *a.hi;
    x["n"] = a.n;
    aggs.push_back(std::move(x));
  }
  auto& checks = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  return j;
}

inline std::string render_jsonl(const MetricsReport& r) {
  std::string out;
  for (const auto& row : r.rows) {
    out += row.dump();
    out += '\n';
  }
  return out;
}

/// Writes the report under `dir` and returns the paths written.
///   table: <kind>.txt
///   csv:   <kind>_rows.csv (one row per raw record) and <kind>_summary.csv
///   jsonl: <kind>.jsonl (one row per raw record) and <kind>_summary.json
inline std::vector<std::filesystem::path> emit_report(const MetricsReport& r, ReportFormat format,
                                                      const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create output directory: " + ec.message());
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& content) {
    const auto path = dir / name;
    detail::write_atomic(path, content);
    written.push_back(path);
  };
  switch (format) {
    case ReportFormat::table:
      put(r.kind + ".txt", render_table(r));
      break;
    case ReportFormat::csv:
      put(r.kind + "_rows.csv", render_rows_csv(r));
      put(r.kind + "_summary.csv", render_summary_csv(r));
      break;
    case ReportFormat::jsonl:
      put(r.kind + ".jsonl", render_jsonl(r));
      put(r.kind + "_summary.json", summary_json(r).dump(2) + "\n");
      break;
  }
  return written;
}

}  // namespace fovea
