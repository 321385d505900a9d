#pragma once

// Parameter sweeps over the interferometer, result tables (CSV / JSON),
// convergence reports and golden-file comparison.
//
// Scenario files are flat `key = value` text; `#` starts a comment. Keys:
//
//   name, series, pump (single_photon | coherent), phi_P, alpha1, alpha2,
//   arg_alpha1, arg_alpha2, allow_unequal_pump, g_prime, arg_g_prime, tau,
//   delta_omega, phi_I, phi_S, transmission, order, cutoff_pump,
//   cutoff_signal, cutoff_idler, cutoff_loss, sweep (phi_S | pump_power |
//   transmission | gain), sweep_start, sweep_stop, sweep_points,
//   sweep_endpoint, fringe_points, max_truncation_loss, format (csv | json),
//   output
//
// A single-photon scenario swept along pump_power takes its gain from the
// laser-pumped configuration of the same power: g' is chosen so that each
// crystal emits as often as NL1 does under that laser.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zwm/errors.hpp"
#include "zwm/interferometer.hpp"

namespace zwm {

inline constexpr const char* kVersion = "zwm 1.0.0";

enum class SweepAxis { phi_S, pump_power, transmission, gain };
enum class OutputFormat { csv, json };

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::phi_S: return "phi_S";
    case SweepAxis::pump_power: return "pump_power";
    case SweepAxis::transmission: return "transmission";
    case SweepAxis::gain: return "gain";
  }
  return "?";
}

inline const char* sweep_unit(SweepAxis a) {
  switch (a) {
    case SweepAxis::phi_S: return "rad";
    case SweepAxis::pump_power: return "photons";
    case SweepAxis::transmission: return "1";
    case SweepAxis::gain: return "1/time";
  }
  return "?";
}

struct Sweep {
  SweepAxis axis = SweepAxis::phi_S;
  double start = 0.0;
  double stop = 2.0 * std::numbers::pi;
  std::size_t points = 32;
  bool endpoint = false;

  [[nodiscard]] std::vector<double> values() const {
    std::vector<double> v(points);
    const double denom = static_cast<double>(endpoint ? points - 1 : points);
    for (std::size_t i = 0; i < points; ++i) v[i] = start + (stop - start) * static_cast<double>(i) / denom;
    return v;
  }
};

struct ScenarioSpec {
  std::string name = "scenario";
  std::string series = "main";
  ZwmConfig config;
  Sweep sweep;
  std::size_t fringe_points = 16;
  OutputFormat format = OutputFormat::csv;
  std::string output;  // empty: stdout / default directory
};

inline void validate(const ScenarioSpec& s) {
  validate(s.config);
  const Sweep& w = s.sweep;
  if (w.points < 2) throw ConfigError("sweep needs at least 2 points");
  if (!std::isfinite(w.start) || !std::isfinite(w.stop)) throw ConfigError("sweep range must be finite");
  if (w.start == w.stop) throw ConfigError("sweep range must be non-degenerate");
  if (s.fringe_points < 3) throw ConfigError("fringe_points must be >= 3");
  const double lo = std::min(w.start, w.stop);
  const double hi = std::max(w.start, w.stop);
  switch (w.axis) {
    case SweepAxis::transmission:
      if (lo < 0.0 || hi > 1.0) throw ConfigError("transmission sweep must stay in [0, 1]");
      break;
    case SweepAxis::pump_power:
      if (lo < 0.0) throw ConfigError("pump power must be non-negative");
      break;
    case SweepAxis::gain:
      if (lo < 0.0) throw ConfigError("gain sweep must be non-negative");
      break;
    case SweepAxis::phi_S:
      break;
  }
}

// ---------------------------------------------------------------------------
// Scenario files

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  if (v == "pi") return std::numbers::pi;
  if (v == "2pi") return 2.0 * std::numbers::pi;
  if (v == "-pi") return -std::numbers::pi;
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  }
  if (used != v.size()) throw ConfigError("key '" + key + "': trailing characters in '" + v + "'");
  return d;
}

inline unsigned long parse_count(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  if (d < 0.0 || d != std::floor(d) || d > 1e9) throw ConfigError("key '" + key + "': expected a count");
  return static_cast<unsigned long>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected true/false");
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

}  // namespace detail

inline ScenarioSpec parse_scenario(std::istream& in) {
  ScenarioSpec s;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double arg1 = 0.0;
  double arg2 = 0.0;
  double g_abs = std::abs(s.config.crystal.g_prime);
  double g_arg = 0.0;
  bool alpha2_set = false;
  std::string line;
  int lineno = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string v = detail::trim(line.substr(eq + 1));
    if (seen[key]++ > 0) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    auto num = [&] { return detail::parse_double(key, v); };
    if (key == "name") s.name = v;
    else if (key == "series") s.series = v;
    else if (key == "pump") {
      if (v == "single_photon") s.config.pump.kind = PumpKind::single_photon;
      else if (v == "coherent") s.config.pump.kind = PumpKind::coherent;
      else throw ConfigError("pump must be single_photon or coherent");
    } else if (key == "phi_P") s.config.pump.phi_P = num();
    else if (key == "alpha1") alpha1 = num();
    else if (key == "alpha2") { alpha2 = num(); alpha2_set = true; }
    else if (key == "arg_alpha1") arg1 = num();
    else if (key == "arg_alpha2") arg2 = num();
    else if (key == "allow_unequal_pump") s.config.pump.allow_unequal_intensity = detail::parse_bool(key, v);
    else if (key == "g_prime") g_abs = num();
    else if (key == "arg_g_prime") g_arg = num();
    else if (key == "tau") s.config.crystal.tau = num();
    else if (key == "delta_omega") s.config.crystal.delta_omega = num();
    else if (key == "phi_I") s.config.phi_I = num();
    else if (key == "phi_S") s.config.phi_S = num();
    else if (key == "transmission") s.config.idler_transmission = num();
    else if (key == "order") s.config.order = static_cast<int>(detail::parse_count(key, v));
    else if (key == "cutoff_pump") s.config.cutoffs.pump = static_cast<unsigned>(detail::parse_count(key, v));
    else if (key == "cutoff_signal") s.config.cutoffs.signal = static_cast<unsigned>(detail::parse_count(key, v));
    else if (key == "cutoff_idler") s.config.cutoffs.idler = static_cast<unsigned>(detail::parse_count(key, v));
    else if (key == "cutoff_loss") s.config.cutoffs.loss = static_cast<unsigned>(detail::parse_count(key, v));
    else if (key == "sweep") {
      if (v == "phi_S") s.sweep.axis = SweepAxis::phi_S;
      else if (v == "pump_power") s.sweep.axis = SweepAxis::pump_power;
      else if (v == "transmission") s.sweep.axis = SweepAxis::transmission;
      else if (v == "gain") s.sweep.axis = SweepAxis::gain;
      else throw ConfigError("unknown sweep axis '" + v + "'");
    } else if (key == "sweep_start") s.sweep.start = num();
    else if (key == "sweep_stop") s.sweep.stop = num();
    else if (key == "sweep_points") s.sweep.points = detail::parse_count(key, v);
    else if (key == "sweep_endpoint") s.sweep.endpoint = detail::parse_bool(key, v);
    else if (key == "fringe_points") s.fringe_points = detail::parse_count(key, v);
    else if (key == "max_truncation_loss") s.config.max_truncation_loss = num();
    else if (key == "format") {
      if (v == "csv") s.format = OutputFormat::csv;
      else if (v == "json") s.format = OutputFormat::json;
      else throw ConfigError("format must be csv or json");
    } else if (key == "output") s.output = v;
    else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  if (!alpha2_set) alpha2 = alpha1;
  s.config.pump.alpha1 = std::polar(alpha1, arg1);
  s.config.pump.alpha2 = std::polar(alpha2, arg2);
  s.config.crystal.g_prime = std::polar(g_abs, g_arg);
  validate(s);
  return s;
}

inline ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  return parse_scenario(in);
}

/// Canonical key = value form; parse_scenario(serialize_scenario(s)) == s.
inline std::string serialize_scenario(const ScenarioSpec& s) {
  std::ostringstream o;
  const auto& c = s.config;
  auto d = [](double v) { return detail::format_double(v); };
  o << "name = " << s.name << "\n"
    << "series = " << s.series << "\n"
    << "pump = " << (c.pump.kind == PumpKind::coherent ? "coherent" : "single_photon") << "\n"
    << "phi_P = " << d(c.pump.phi_P) << "\n"
    << "alpha1 = " << d(std::abs(c.pump.alpha1)) << "\n"
    << "alpha2 = " << d(std::abs(c.pump.alpha2)) << "\n"
    << "arg_alpha1 = " << d(std::arg(c.pump.alpha1)) << "\n"
    << "arg_alpha2 = " << d(std::arg(c.pump.alpha2)) << "\n"
    << "allow_unequal_pump = " << (c.pump.allow_unequal_intensity ? "true" : "false") << "\n"
    << "g_prime = " << d(std::abs(c.crystal.g_prime)) << "\n"
    << "arg_g_prime = " << d(std::arg(c.crystal.g_prime)) << "\n"
    << "tau = " << d(c.crystal.tau) << "\n"
    << "delta_omega = " << d(c.crystal.delta_omega) << "\n"
    << "phi_I = " << d(c.phi_I) << "\n"
    << "phi_S = " << d(c.phi_S) << "\n"
    << "transmission = " << d(c.idler_transmission) << "\n"
    << "order = " << c.order << "\n";
  if (c.cutoffs.pump) o << "cutoff_pump = " << *c.cutoffs.pump << "\n";
  if (c.cutoffs.signal) o << "cutoff_signal = " << *c.cutoffs.signal << "\n";
  if (c.cutoffs.idler) o << "cutoff_idler = " << *c.cutoffs.idler << "\n";
  if (c.cutoffs.loss) o << "cutoff_loss = " << *c.cutoffs.loss << "\n";
  o << "sweep = " << to_string(s.sweep.axis) << "\n"
    << "sweep_start = " << d(s.sweep.start) << "\n"
    << "sweep_stop = " << d(s.sweep.stop) << "\n"
    << "sweep_points = " << s.sweep.points << "\n"
    << "sweep_endpoint = " << (s.sweep.endpoint ? "true" : "false") << "\n"
    << "fringe_points = " << s.fringe_points << "\n"
    << "max_truncation_loss = " << d(c.max_truncation_loss) << "\n"
    << "format = " << (s.format == OutputFormat::json ? "json" : "csv") << "\n";
  return o.str();
}

/// 64-bit FNV-1a of the canonical serialization (output path excluded).
inline std::uint64_t config_hash(const ScenarioSpec& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : serialize_scenario(s)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Result tables

inline const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> cols{"sweep_value", "rate_R",    "coincidence_C",
                                             "visibility",  "ratio_rho", "truncation_loss"};
  return cols;
}

/// Default absolute tolerances written into every table's header.
inline const std::vector<double>& default_tolerances() {
  static const std::vector<double> tol{1e-12, 1e-12, 1e-14, 1e-9, 1e-9, 1e-12};
  return tol;
}

struct ResultRow {
  double sweep_value = 0.0;
  double rate = 0.0;
  double coincidence = 0.0;
  double visibility = 0.0;
  double ratio = std::numeric_limits<double>::quiet_NaN();
  double truncation_loss = 0.0;

  [[nodiscard]] std::vector<double> values() const {
    return {sweep_value, rate, coincidence, visibility, ratio, truncation_loss};
  }
};

struct ResultTable {
  std::string name;
  std::string series;
  SweepAxis axis = SweepAxis::phi_S;
  std::uint64_t hash = 0;
  std::string version = kVersion;
  std::vector<ResultRow> rows;
};

/// Configuration evaluated at one sweep value.
inline ZwmConfig config_at(const ScenarioSpec& s, double value) {
  ZwmConfig c = s.config;
  switch (s.sweep.axis) {
    case SweepAxis::phi_S:
      c.phi_S = value;
      break;
    case SweepAxis::transmission:
      c.idler_transmission = value;
      break;
    case SweepAxis::gain:
      c.crystal.g_prime = std::polar(value, std::arg(c.crystal.g_prime));
      break;
    case SweepAxis::pump_power: {
      const double a = std::sqrt(value);
      if (c.pump.kind == PumpKind::coherent) {
        c.pump.alpha1 = std::polar(a, std::arg(c.pump.alpha1));
        c.pump.alpha2 = std::polar(a, std::arg(c.pump.alpha2));
      } else {
        ZwmConfig lp = c;
        lp.pump = PumpConfig::coherent_power(value, c.pump.phi_P);
        lp.idler_transmission = 1.0;
        lp.cutoffs = {};
        c.crystal.g_prime = matched_single_photon_config(lp).crystal.g_prime;
      }
      break;
    }
  }
  return c;
}

inline ResultRow evaluate_point(const ScenarioSpec& s, double value) {
  const ZwmConfig c = config_at(s, value);
  const ZwmOutput out = run_zwm(c);
  ResultRow row;
  row.sweep_value = value;
  row.rate = detection_rate(out, c.phi_S);
  row.coincidence = coincidence_rate(out);
  row.visibility = fringe(out, s.fringe_points).visibility;
  row.truncation_loss = out.truncation_loss;
  if (c.pump.kind == PumpKind::coherent && std::abs(c.pump.alpha1) > 0.0 && std::abs(c.crystal.g_prime) > 0.0) {
    ZwmConfig reference = c;
    reference.idler_transmission = 1.0;
    reference.cutoffs = {};
    const ZwmOutput aligned = (c.idler_transmission == 1.0) ? out : run_zwm(reference);
    row.ratio = nl2_nl1_ratio(aligned, run_zwm(matched_single_photon_config(reference)));
  }
  return row;
}

/// Evaluates every sweep point (concurrently) and assembles rows in sweep order.
inline ResultTable run_scenario(const ScenarioSpec& s) {
  validate(s);
  ResultTable t{s.name, s.series, s.sweep.axis, config_hash(s), kVersion, {}};
  const auto values = s.sweep.values();
  std::vector<std::future<ResultRow>> jobs;
  jobs.reserve(values.size());
  for (double v : values) jobs.push_back(std::async(std::launch::async, [&s, v] { return evaluate_point(s, v); }));
  for (auto& j : jobs) t.rows.push_back(j.get());
  return t;
}

inline std::vector<ResultTable> run_scenarios(const std::vector<ScenarioSpec>& specs) {
  std::vector<ResultTable> out;
  out.reserve(specs.size());
  for (const auto& s : specs) out.push_back(run_scenario(s));
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline void write_csv(std::ostream& o, const std::vector<ResultTable>& tables) {
  const auto& cols = table_columns();
  const auto& tol = default_tolerances();
  for (const auto& t : tables) {
    o << "# scenario: " << t.name << "\n"
      << "# series: " << t.series << "\n"
      << "# sweep_axis: " << to_string(t.axis) << "\n"
      << "# config_hash: " << hex64(t.hash) << "\n"
      << "# version: " << t.version << "\n"
      << "# units: sweep_value=" << sweep_unit(t.axis)
      << " rate_R=1/pump_event coincidence_C=1/pump_event visibility=1 ratio_rho=1 truncation_loss=1\n"
      << "# tolerance:";
    for (std::size_t i = 0; i < cols.size(); ++i) {
      char buf[24];
      std::snprintf(buf, sizeof buf, "%.3g", tol[i]);
      o << " " << cols[i] << "=" << buf;
    }
    o << "\n";
    for (std::size_t i = 0; i < cols.size(); ++i) o << (i ? "," : "") << cols[i];
    o << "\n";
    for (const auto& r : t.rows) {
      const auto v = r.values();
      for (std::size_t i = 0; i < v.size(); ++i) o << (i ? "," : "") << detail::format_double(v[i]);
      o << "\n";
    }
  }
}

inline std::string to_csv(const std::vector<ResultTable>& tables) {
  std::ostringstream o;
  write_csv(o, tables);
  return o.str();
}

inline nlohmann::json to_json(const std::vector<ResultTable>& tables) {
  nlohmann::json doc;
  doc["version"] = kVersion;
  doc["tables"] = nlohmann::json::array();
  for (const auto& t : tables) {
    nlohmann::json jt;
    jt["scenario"] = t.name;
    jt["series"] = t.series;
    jt["sweep_axis"] = to_string(t.axis);
    jt["config_hash"] = hex64(t.hash);
    jt["columns"] = table_columns();
    jt["rows"] = nlohmann::json::array();
    for (const auto& r : t.rows) {
      nlohmann::json row = nlohmann::json::array();
      for (double v : r.values()) row.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
      jt["rows"].push_back(row);
    }
    doc["tables"].push_back(jt);
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Golden comparison

struct ParsedTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline std::vector<ParsedTable> parse_csv(std::istream& in) {
  std::vector<ParsedTable> tables;
  std::string line;
  bool in_data = false;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(detail::trim(cell));
    return out;
  };
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (in_data || tables.empty()) {
        tables.emplace_back();
        in_data = false;
      }
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        tables.back().meta[detail::trim(line.substr(1, colon - 1))] = detail::trim(line.substr(colon + 1));
      }
      continue;
    }
    if (tables.empty()) tables.emplace_back();
    ParsedTable& t = tables.back();
    if (t.columns.empty()) {
      t.columns = split(line);
      in_data = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : split(line)) {
      if (cell == "nan") {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        row.push_back(detail::parse_double("csv", cell));
      }
    }
    if (row.size() != t.columns.size()) throw ConfigError("csv row width does not match its header");
    t.rows.push_back(std::move(row));
  }
  return tables;
}

inline std::vector<ParsedTable> load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table '" + path + "'");
  return parse_csv(in);
}

/// Per-column tolerances from a `# tolerance: col=value ...` header line.
inline std::map<std::string, double> parse_tolerances(const ParsedTable& t) {
  std::map<std::string, double> tol;
  auto it = t.meta.find("tolerance");
  if (it == t.meta.end()) return tol;
  std::stringstream ss(it->second);
  std::string item;
  while (ss >> item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("malformed tolerance entry '" + item + "'");
    tol[item.substr(0, eq)] = detail::parse_double("tolerance", item.substr(eq + 1));
  }
  return tol;
}

struct DiffReport {
  bool pass = true;
  std::vector<std::string> messages;

  void fail(std::string m) {
    pass = false;
    messages.push_back(std::move(m));
  }
};

/// Element-wise comparison against the golden tables, using the absolute
/// tolerances declared in the golden headers (missing columns compare exactly).
inline DiffReport compare_tables(const std::vector<ParsedTable>& actual, const std::vector<ParsedTable>& golden) {
  DiffReport report;
  if (actual.size() != golden.size()) {
    report.fail("table count differs: " + std::to_string(actual.size()) + " vs golden " +
                std::to_string(golden.size()));
    return report;
  }
  for (std::size_t b = 0; b < golden.size(); ++b) {
    const auto& a = actual[b];
    const auto& g = golden[b];
    const std::string where = "table " + std::to_string(b) + " (" +
                              (g.meta.count("series") ? g.meta.at("series") : std::string("?")) + ")";
    if (a.columns != g.columns) {
      std::string m = where + ": schema mismatch;";
      for (const auto& c : g.columns) {
        if (std::find(a.columns.begin(), a.columns.end(), c) == a.columns.end()) m += " missing '" + c + "'";
      }
      for (const auto& c : a.columns) {
        if (std::find(g.columns.begin(), g.columns.end(), c) == g.columns.end()) m += " unexpected '" + c + "'";
      }
      if (a.columns.size() == g.columns.size()) m += " column order differs";
      report.fail(m);
      continue;
    }
    if (a.rows.size() != g.rows.size()) {
      report.fail(where + ": row count " + std::to_string(a.rows.size()) + " vs golden " +
                  std::to_string(g.rows.size()));
      continue;
    }
    const auto tol = parse_tolerances(g);
    for (std::size_t r = 0; r < g.rows.size(); ++r) {
      for (std::size_t c = 0; c < g.columns.size(); ++c) {
        const double x = a.rows[r][c];
        const double y = g.rows[r][c];
        if (std::isnan(x) && std::isnan(y)) continue;
        const auto t = tol.find(g.columns[c]);
        const double bound = t == tol.end() ? 0.0 : t->second;
        if (std::isnan(x) != std::isnan(y) || !(std::abs(x - y) <= bound)) {
          report.fail(where + ": row " + std::to_string(r) + " column '" + g.columns[c] + "': " +
                      detail::format_double(x) + " vs golden " + detail::format_double(y) + " (tolerance " +
                      detail::format_double(bound) + ")");
        }
      }
    }
  }
  return report;
}

inline DiffReport compare_golden(const std::vector<ResultTable>& tables, const std::string& golden_path) {
  std::istringstream in(to_csv(tables));
  return compare_tables(parse_csv(in), load_csv(golden_path));
}

// ---------------------------------------------------------------------------
// Convergence

struct ConvergenceRow {
  std::string variant;
  std::vector<double> drift;  // max |variant - baseline| per table column after sweep_value
};

struct ConvergenceReport {
  std::string name;
  std::vector<ConvergenceRow> rows;

  [[nodiscard]] const ConvergenceRow& row(const std::string& variant) const& {
    for (const auto& r : rows) {
      if (r.variant == variant) return r;
    }
    throw ConfigError("no convergence variant '" + variant + "'");
  }
  const ConvergenceRow& row(const std::string&) const&& = delete;
};

/// Explicit cutoffs twice the defaults `make_registry` would pick.
inline ZwmConfig with_doubled_cutoffs(const ZwmConfig& c) {
  const RegistryPtr reg = make_registry(c);
  ZwmConfig d = c;
  d.cutoffs.pump = 2 * std::max(1u, reg->cutoff(reg->index_of(modes::kPump1)));
  d.cutoffs.signal = 2 * reg->cutoff(reg->index_of(modes::kSignal1));
  d.cutoffs.idler = 2 * reg->cutoff(reg->index_of(modes::kIdler));
  d.cutoffs.loss = 2 * (reg->contains(modes::kLoss) ? reg->cutoff(reg->index_of(modes::kLoss))
                                                    : static_cast<unsigned>(c.order));
  return d;
}

namespace detail {

inline std::vector<double> max_drift(const ResultTable& base, const ResultTable& other) {
  std::vector<double> drift(table_columns().size() - 1, 0.0);
  for (std::size_t r = 0; r < base.rows.size(); ++r) {
    const auto a = base.rows[r].values();
    const auto b = other.rows[r].values();
    for (std::size_t c = 1; c < a.size(); ++c) {
      if (std::isnan(a[c]) && std::isnan(b[c])) continue;
      const double d = std::abs(a[c] - b[c]);
      drift[c - 1] = std::max(drift[c - 1], std::isnan(d) ? std::numeric_limits<double>::infinity() : d);
    }
  }
  return drift;
}

}  // namespace detail

/// Re-runs the sweep with doubled cutoffs and with every Dyson order 1..3
/// and reports the largest change of each observable against the baseline.
inline ConvergenceReport convergence_report(const ScenarioSpec& spec) {
  validate(spec);
  const ResultTable base = run_scenario(spec);
  ConvergenceReport report{spec.name, {}};

  ScenarioSpec doubled = spec;
  doubled.config = with_doubled_cutoffs(spec.config);
  report.rows.push_back({"cutoffs_x2", detail::max_drift(base, run_scenario(doubled))});

  for (int order = 1; order <= kMaxDysonOrder; ++order) {
    ScenarioSpec v = spec;
    v.config.order = order;
    v.config.cutoffs = {};
    report.rows.push_back({"order_" + std::to_string(order), detail::max_drift(base, run_scenario(v))});
  }
  return report;
}

inline void write_convergence_csv(std::ostream& o, const ConvergenceReport& r) {
  o << "# convergence: " << r.name << "\n"
    << "variant,drift_rate_R,drift_coincidence_C,drift_visibility,drift_ratio_rho,drift_truncation_loss\n";
  for (const auto& row : r.rows) {
    o << row.variant;
    for (double d : row.drift) o << "," << detail::format_double(d);
    o << "\n";
  }
}

// ---------------------------------------------------------------------------
// Presets

inline constexpr double kFig4bMaxPairProbability = 0.03;

inline std::vector<std::string> preset_names() {
  return {"fringe-sp", "fringe-lp", "fig3", "fig4b", "transmission-sp"};
}

inline std::vector<ScenarioSpec> preset(const std::string& name) {
  ScenarioSpec base;
  base.name = name;
  base.config.crystal.g_prime = 0.1;
  base.config.crystal.tau = 1.0;

  if (name == "fringe-sp" || name == "fringe-lp") {
    ScenarioSpec s = base;
    s.series = name == "fringe-sp" ? "single_photon" : "laser";
    if (name == "fringe-lp") s.config.pump = PumpConfig::coherent_power(1.0);
    s.sweep = {SweepAxis::phi_S, 0.0, 2.0 * std::numbers::pi, 32, false};
    return {s};
  }
  if (name == "fig3") {
    ScenarioSpec lp = base;
    lp.series = "laser";
    lp.config.pump = PumpConfig::coherent_power(1.0);
    lp.sweep = {SweepAxis::pump_power, 0.1, 1.0, 10, true};
    ScenarioSpec sp = lp;
    sp.series = "single_photon";
    sp.config.pump = PumpConfig::single_photon();
    return {lp, sp};
  }
  if (name == "fig4b") {
    std::vector<ScenarioSpec> out;
    for (double g : {0.05, 0.10, 0.15}) {
      ScenarioSpec s = base;
      char label[32];
      std::snprintf(label, sizeof label, "g_lp=%.2f", g);
      s.series = label;
      s.config.crystal.g_prime = g;
      s.config.pump = PumpConfig::coherent_power(1.0);
      const double max_power = kFig4bMaxPairProbability / std::norm(first_order_coefficient(s.config.crystal));
      s.sweep = {SweepAxis::pump_power, max_power / 10.0, max_power, 10, true};
      out.push_back(s);
    }
    return out;
  }
  if (name == "transmission-sp") {
    ScenarioSpec s = base;
    s.series = "single_photon";
    s.sweep = {SweepAxis::transmission, 0.0, 1.0, 5, true};
    return {s};
  }
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace zwm
