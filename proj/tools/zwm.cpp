// zwm: run interferometer sweeps, presets, convergence checks and golden diffs.
//
//   zwm run <scenario-file> [--out PATH] [--format csv|json]
//   zwm preset <name> [--out PATH] [--format csv|json]
//   zwm converge <scenario-file> [--out PATH]
//   zwm diff <table.csv> <golden.csv>
//
// Without --out, results go to $ZWM_OUTPUT_DIR/<name>.<ext> when that variable
// is set and to stdout otherwise.
//
// Exit codes: 0 success, 1 diff mismatch, 2 invalid scenario or arguments,
// 3 truncation loss above the configured bound.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zwm/zwm.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDiff = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitTruncation = 3;

std::optional<std::filesystem::path> resolve_output(const std::string& explicit_out, const std::string& spec_out,
                                                    const std::string& stem, const char* ext) {
  const char* env = std::getenv("ZWM_OUTPUT_DIR");
  const std::string chosen = !explicit_out.empty() ? explicit_out : spec_out;
  if (chosen == "-") return std::nullopt;
  if (!chosen.empty()) {
    std::filesystem::path p(chosen);
    if (p.is_relative() && explicit_out.empty() && env && *env) p = std::filesystem::path(env) / p;
    return p;
  }
  if (env && *env) return std::filesystem::path(env) / (stem + ext);
  return std::nullopt;
}

template <class Writer>
void emit(const std::optional<std::filesystem::path>& path, Writer&& write) {
  if (!path) {
    write(std::cout);
    return;
  }
  if (path->has_parent_path()) std::filesystem::create_directories(path->parent_path());
  std::ofstream out(*path);
  if (!out) throw zwm::ConfigError("cannot write '" + path->string() + "'");
  write(out);
  std::cerr << "wrote " << path->string() << "\n";
}

void emit_tables(const std::vector<zwm::ResultTable>& tables, zwm::OutputFormat format,
                 const std::optional<std::filesystem::path>& path) {
  emit(path, [&](std::ostream& o) {
    if (format == zwm::OutputFormat::json) {
      o << zwm::to_json(tables).dump(2) << "\n";
    } else {
      zwm::write_csv(o, tables);
    }
  });
}

std::optional<zwm::OutputFormat> parse_format(const std::string& f) {
  if (f.empty()) return std::nullopt;
  if (f == "csv") return zwm::OutputFormat::csv;
  if (f == "json") return zwm::OutputFormat::json;
  throw zwm::ConfigError("--format must be csv or json");
}

// Notes on stderr for gains past the validated perturbative regime and for
// the closed-form g~^2 disagreeing with its integral.
void warn(const std::vector<zwm::ScenarioSpec>& specs) {
  std::set<std::string> seen;
  for (const auto& spec : specs) {
    zwm::CrystalParams worst = spec.config.crystal;
    if (spec.sweep.axis == zwm::SweepAxis::gain) {
      for (double v : spec.sweep.values()) {
        if (std::abs(v) > std::abs(worst.g_prime)) worst.g_prime = v;
      }
    }
    if (zwm::outside_perturbative_regime(worst)) {
      std::cerr << "zwm: warning: " << spec.name << ": |g'| tau = " << std::abs(worst.g_prime) * worst.tau
                << " exceeds " << zwm::kPerturbativeThreshold << "; Dyson truncation may be inaccurate\n";
    }
    const auto coeffs = zwm::analytic_coefficients(spec.config.crystal);
    if (!coeffs.formula_agrees && seen.insert(coeffs.diagnostic).second) {
      std::cerr << "zwm: note: " << coeffs.diagnostic << "\n";
    }
  }
}

const char* extension(zwm::OutputFormat f) { return f == zwm::OutputFormat::json ? ".json" : ".csv"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Induced-coherence interferometer simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(zwm::kVersion));

  std::string spec_path;
  std::string preset_name;
  std::string out_path;
  std::string format_name;
  std::string table_path;
  std::string golden_path;

  auto* run = app.add_subcommand("run", "Evaluate a scenario file");
  run->add_option("scenario", spec_path, "Scenario file")->required();
  run->add_option("--out", out_path, "Output path ('-' for stdout)");
  run->add_option("--format", format_name, "csv or json");

  auto* pre = app.add_subcommand("preset", "Evaluate a built-in scenario");
  pre->add_option("name", preset_name, "Preset name")->required();
  pre->add_option("--out", out_path, "Output path ('-' for stdout)");
  pre->add_option("--format", format_name, "csv or json");

  auto* conv = app.add_subcommand("converge", "Report observable drift under doubled cutoffs and Dyson orders 1-3");
  conv->add_option("scenario", spec_path, "Scenario file")->required();
  conv->add_option("--out", out_path, "Output path ('-' for stdout)");

  auto* diff = app.add_subcommand("diff", "Compare a result table with a golden file");
  diff->add_option("table", table_path, "Result table (CSV)")->required();
  diff->add_option("golden", golden_path, "Golden table (CSV) with a tolerance header")->required();

  app.add_subcommand("list-presets", "List built-in scenario names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (app.got_subcommand("list-presets")) {
      for (const auto& n : zwm::preset_names()) std::cout << n << "\n";
      return kExitOk;
    }
    if (run->parsed()) {
      const zwm::ScenarioSpec spec = zwm::load_scenario(spec_path);
      const auto format = parse_format(format_name).value_or(spec.format);
      warn({spec});
      const auto tables = zwm::run_scenarios({spec});
      emit_tables(tables, format, resolve_output(out_path, spec.output, spec.name, extension(format)));
      return kExitOk;
    }
    if (pre->parsed()) {
      const auto specs = zwm::preset(preset_name);
      const auto format = parse_format(format_name).value_or(zwm::OutputFormat::csv);
      warn(specs);
      const auto tables = zwm::run_scenarios(specs);
      emit_tables(tables, format, resolve_output(out_path, "", preset_name, extension(format)));
      return kExitOk;
    }
    if (conv->parsed()) {
      const zwm::ScenarioSpec spec = zwm::load_scenario(spec_path);
      warn({spec});
      const auto report = zwm::convergence_report(spec);
      emit(resolve_output(out_path, "", spec.name + "-convergence", ".csv"),
           [&](std::ostream& o) { zwm::write_convergence_csv(o, report); });
      return kExitOk;
    }
    if (diff->parsed()) {
      const auto report = zwm::compare_tables(zwm::load_csv(table_path), zwm::load_csv(golden_path));
      for (const auto& m : report.messages) std::cout << m << "\n";
      std::cout << (report.pass ? "MATCH" : "MISMATCH") << "\n";
      return report.pass ? kExitOk : kExitDiff;
    }
  } catch (const zwm::TruncationError& e) {
    std::cerr << "zwm: truncation: " << e.what() << "\n";
    return kExitTruncation;
  } catch (const zwm::ConfigError& e) {
    std::cerr << "zwm: invalid scenario: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const zwm::SizingError& e) {
    std::cerr << "zwm: invalid scenario: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "zwm: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
