#pragma once

// Config-driven experiments: strict parsing of experiment configs, dispatch to
// the verify module, and the report/CSV artifacts written by the command line
// front end.
//
// Config layout (unknown fields are rejected at every level):
//   {"schema_version": 1, "name": "...", "kind": "...", "symbol": {...},
//    "params": {...}, "seed": 1, "output_dir": "."}
//
// Exit codes: 0 success, 1 config or argument error (nothing written),
// 2 hypothesis violation, 3 numerical non-convergence. Codes 2 and 3 still
// write the report, with the diagnostics.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharptrace/kernels.hpp"
#include "sharptrace/verify.hpp"

namespace sharptrace::experiment {

inline constexpr int kSchemaVersion = 1;

enum class Kind { constants, trace, rho_scan, sharpness, critical, duality, surface_checks };

struct KindInfo {
  Kind kind;
  const char* name;
  const char* summary;
  std::vector<const char*> params;
};

const std::vector<KindInfo>& kinds();
const char* to_string(Kind kind);
Kind kind_from_string(const std::string& name);

const char* version();

struct Config {
  int schema_version = kSchemaVersion;
  std::string name;
  Kind kind = Kind::constants;
  nlohmann::json symbol;
  /// With every default filled in.
  nlohmann::json params;
  std::uint64_t seed = 1;
  std::string output_dir = ".";

  nlohmann::json to_json() const;
};

/// Validates and resolves; throws InvalidArgument.
Config parse_config(const nlohmann::json& j);
/// Reads and parses a file; malformed JSON is an InvalidArgument too.
Config load_config(const std::string& path);

enum class Status { ok, hypothesis_violation, non_convergence };
const char* to_string(Status status);

struct Outcome {
  Status status = Status::ok;
  nlohmann::json result;
  std::vector<CsvRow> rows;
  int exit_code() const;
};

/// Runs a parsed config. Hypothesis violations and non-convergence become
/// outcomes; InvalidArgument propagates.
Outcome execute(const Config& config, Execution exec = Execution::parallel);

/// The report document: name, kind, status, version, resolved config, wall
/// clock and result. Everything but "wall_clock" is a function of the config.
nlohmann::json make_report(const Config& config, const Outcome& outcome, const nlohmann::json& wall_clock);

/// Writes <output_dir>/<name>.report.json and, on success, <name>.csv. Files are
/// written to a temporary name and renamed.
std::vector<std::string> write_outputs(const Config& config, const Outcome& outcome,
                                       const nlohmann::json& wall_clock);

/// Loads every config before running any, then runs them in order and stops
/// at the first nonzero exit code.
int run_files(const std::vector<std::string>& paths, std::ostream& log, Execution exec = Execution::parallel);

/// Text listing (one kind per line) or the machine-readable document.
std::string list_text();
nlohmann::json list_json();

}  // namespace sharptrace::experiment
