#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fou_sheet/errors.hpp"

namespace fou::harness {

enum class ExperimentKind {
  kSimulate,
  kEstimate,
  kConsistency,
  kVarianceScaling,
  kDenominatorGrowth,
  kNormalityGap,
  kLemmaIntegral,
  kBesselCheck,
};

std::string_view kind_name(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view name);
const std::vector<ExperimentKind>& all_kinds();

/// Experiments whose statement needs alpha, beta in (1/2, 5/8): validation
/// refuses other exponents.
bool requires_theorem_regime(ExperimentKind kind);
/// Experiments that only warn outside (1/2, 5/8).
bool warns_outside_theorem_regime(ExperimentKind kind);
/// Exact trace computations, capped at 32 cells per direction.
bool is_chaos_exact(ExperimentKind kind);
/// Monte Carlo over simulated sheets, capped at 64 cells per direction.
bool is_simulation(ExperimentKind kind);

inline constexpr int kChaosCellCap = 32;
inline constexpr int kSimulationCellCap = 64;

/// A horizon [0, T] x [0, S].
struct Horizon {
  double t = 0.0;
  double s = 0.0;
  bool operator==(const Horizon&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kSimulate;
  double alpha = 0.55;
  double beta = 0.55;
  double theta = 1.0;
  std::vector<Horizon> horizons = {{4.0, 4.0}, {8.0, 8.0}, {16.0, 16.0}};
  double cell_step = 0.25;
  int replications = 200;
  std::uint64_t seed = 1;
  std::string output_path = "fou-sheet-report";
  double epsilon = 0.05;
  std::int64_t samples = 200000;
  std::vector<double> alphas = {0.55};
  std::vector<double> betas = {0.52, 0.56, 0.60, 0.62};
  int bessel_points = 200;
  bool allow_large_grid = false;
  bool timing = false;

  /// Regime notes for experiments that run outside (1/2, 5/8) with a warning.
  std::vector<std::string> warnings;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Raw key-value document before typing and validation.
///
/// Grammar, one item per line:
///   # comment            (also ';'; full-line only)
///   [section]            (model, grid or run)
///   key = value          (whitespace around key and value is ignored)
/// Keys before the first section header are top-level. Keys are addressed
/// as "section.key", top-level keys by their bare name.
class ConfigDocument {
 public:
  struct Entry {
    std::string value;
    int line = 0;    ///< 0 for values set programmatically
    int column = 0;  ///< column of the first character of the value
  };

  static ConfigDocument parse(std::string_view source);

  /// Set or replace a value; used for command line overrides.
  void set(const std::string& key, std::string value);

  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
};

/// Every accepted key, in canonical order.
const std::vector<std::string>& known_keys();

/// Type and validate a document. Syntax and type errors in values that
/// came from text raise ParseError at the value; every other problem
/// (unknown keys, out-of-range values, regime violations, grid caps, type
/// errors in overrides) is collected into a single ValidationError.
ExperimentConfig build_config(const ConfigDocument& doc);

/// build_config(ConfigDocument::parse(source)).
ExperimentConfig parse_config(std::string_view source);

/// Deterministic text form of a config; parse_config() of it returns the
/// same config.
std::string canonical_config_text(const ExperimentConfig& cfg);

/// Git-style object hash: SHA-1 of "blob <size>\0" followed by the
/// canonical config text, as 40 lowercase hex digits.
std::string config_hash(const ExperimentConfig& cfg);

std::string library_version();

/// A table of real numbers with named columns.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// One row of the plot-data file.
struct PlotRow {
  double x = 0.0;
  std::string metric;
  double value = 0.0;
  double error = 0.0;  ///< one standard error, 0 for exact quantities
};

struct RunReport {
  static constexpr int kSchemaVersion = 1;

  ExperimentConfig config;
  std::string config_hash;
  std::string library_version;
  std::vector<Table> tables;
  std::map<std::string, double> summary;
  std::map<std::string, bool> checks;
  std::vector<PlotRow> plot;
  std::vector<std::string> warnings;
  std::optional<double> wall_clock_seconds;  ///< only with cfg.timing
};

/// A module error raised while running an experiment, prefixed with the kind.
class ExperimentError : public Error {
 public:
  using Error::Error;
};

/// Run one experiment. Output depends only on the config (including its
/// seed), never on the worker count or on timing unless cfg.timing is set.
RunReport run_experiment(const ExperimentConfig& cfg, int workers = -1);

/// Full report as indented JSON text.
std::string report_json(const RunReport& report);

/// Plot-data table: header "experiment,x,metric,value,error", then one
/// line per PlotRow with numbers printed as %.17g.
std::string report_csv(const RunReport& report);

/// Writes `<base>.json` and `<base>.csv`; a trailing ".json" on `base` is
/// dropped first. Raises IoError naming the path on failure.
void write_report(const RunReport& report, const std::string& base);

/// Config hash stored in a report written by report_json().
std::string read_report_hash(std::string_view json_text);

}  // namespace fou::harness
