#include "fou_sheet/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fou_sheet/chaos.hpp"
#include "fou_sheet/estimator.hpp"
#include "fou_sheet/fbs.hpp"
#include "fou_sheet/grid.hpp"
#include "fou_sheet/ou_sheet.hpp"
#include "fou_sheet/parallel.hpp"
#include "fou_sheet/rng.hpp"
#include "fou_sheet/singular.hpp"
#include "fou_sheet/specfun.hpp"

#ifndef FOU_SHEET_VERSION
#define FOU_SHEET_VERSION "0.0.0"
#endif

namespace fou::harness {

namespace {

struct KindInfo {
  ExperimentKind kind;
  std::string_view name;
};

constexpr KindInfo kKinds[] = {
    {ExperimentKind::kSimulate, "simulate"},
    {ExperimentKind::kEstimate, "estimate"},
    {ExperimentKind::kConsistency, "consistency"},
    {ExperimentKind::kVarianceScaling, "variance-scaling"},
    {ExperimentKind::kDenominatorGrowth, "denominator-growth"},
    {ExperimentKind::kNormalityGap, "normality-gap"},
    {ExperimentKind::kLemmaIntegral, "lemma-integral"},
    {ExperimentKind::kBesselCheck, "bessel-check"},
};

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Short form for messages.
std::string format_short(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::string_view kind_name(ExperimentKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_kind(std::string_view name) {
  for (const auto& k : kKinds) {
    if (k.name == name) return k.kind;
  }
  return std::nullopt;
}

const std::vector<ExperimentKind>& all_kinds() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> out;
    for (const auto& k : kKinds) out.push_back(k.kind);
    return out;
  }();
  return kinds;
}

bool requires_theorem_regime(ExperimentKind kind) {
  return kind == ExperimentKind::kConsistency || kind == ExperimentKind::kNormalityGap ||
         kind == ExperimentKind::kVarianceScaling;
}

bool warns_outside_theorem_regime(ExperimentKind kind) {
  return kind == ExperimentKind::kEstimate || kind == ExperimentKind::kDenominatorGrowth ||
         kind == ExperimentKind::kLemmaIntegral;
}

bool is_chaos_exact(ExperimentKind kind) {
  return kind == ExperimentKind::kVarianceScaling || kind == ExperimentKind::kDenominatorGrowth ||
         kind == ExperimentKind::kNormalityGap;
}

bool is_simulation(ExperimentKind kind) {
  return kind == ExperimentKind::kSimulate || kind == ExperimentKind::kEstimate ||
         kind == ExperimentKind::kConsistency;
}

// ---------------------------------------------------------------------------
// Document parsing

ConfigDocument ConfigDocument::parse(std::string_view source) {
  ConfigDocument doc;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    const std::size_t end = std::min(source.find('\n', pos), source.size());
    const std::string_view line = source.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;

    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#' || line[first] == ';') {
      if (end == source.size()) break;
      continue;
    }
    const int col = static_cast<int>(first) + 1;
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string_view::npos) throw ParseError("unterminated section header", line_no, col);
      const std::string rest = trim(line.substr(close + 1));
      if (!rest.empty() && rest[0] != '#' && rest[0] != ';') {
        throw ParseError("unexpected text after section header", line_no, static_cast<int>(close) + 2);
      }
      section = trim(line.substr(first + 1, close - first - 1));
      if (section.empty()) throw ParseError("empty section name", line_no, col);
    } else {
      const auto eq = line.find('=', first);
      if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no, col);
      const std::string key = trim(line.substr(first, eq - first));
      if (key.empty()) throw ParseError("missing key before '='", line_no, col);
      if (key.find_first_of(" \t") != std::string::npos) throw ParseError("key contains whitespace", line_no, col);
      const std::string_view raw = line.substr(eq + 1);
      const auto vfirst = raw.find_first_not_of(" \t");
      const int vcol = static_cast<int>(eq) + 2 + static_cast<int>(vfirst == std::string_view::npos ? 0 : vfirst);
      const std::string full = section.empty() ? key : section + "." + key;
      if (doc.entries_.count(full) != 0) throw ParseError("duplicate key '" + full + "'", line_no, col);
      doc.entries_[full] = Entry{trim(raw), line_no, vcol};
    }
    if (end == source.size()) break;
  }
  return doc;
}

void ConfigDocument::set(const std::string& key, std::string value) { entries_[key] = Entry{std::move(value), 0, 0}; }

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "kind",          "seed",           "model.alpha",        "model.beta",       "model.theta",
      "grid.horizons", "grid.cell_step", "run.replications",   "run.epsilon",      "run.output",
      "run.samples",   "run.alphas",     "run.betas",          "run.bessel_points", "run.allow_large_grid",
      "run.timing"};
  return keys;
}

namespace {

// Converts document entries to typed values. A bad value from text raises
// ParseError at once; a bad override becomes a violation.
class Reader {
 public:
  Reader(const ConfigDocument& doc, std::vector<std::string>& violations) : doc_(doc), violations_(violations) {}

  const ConfigDocument::Entry* find(const std::string& key) const {
    const auto it = doc_.entries().find(key);
    return it == doc_.entries().end() ? nullptr : &it->second;
  }

  template <typename T, typename Convert>
  void read(const std::string& key, T& out, Convert convert, const char* expected) {
    const auto* e = find(key);
    if (e == nullptr) return;
    std::optional<T> value = convert(e->value);
    if (value) {
      out = std::move(*value);
      return;
    }
    const std::string msg = "'" + key + "' expects " + expected + ", got '" + e->value + "'";
    if (e->line > 0) throw ParseError(msg, e->line, e->column);
    violations_.push_back(msg);
  }

 private:
  const ConfigDocument& doc_;
  std::vector<std::string>& violations_;
};

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

template <typename Int>
std::optional<Int> to_integer(const std::string& s) {
  Int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<bool> to_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  return std::nullopt;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::size_t pos = 0;
  while (true) {
    const auto comma = s.find(',', pos);
    items.push_back(trim(std::string_view(s).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return items;
}

std::optional<std::vector<double>> to_double_list(const std::string& s) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (const auto& item : split_list(s)) {
    const auto v = to_double(item);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

// Items are "T" (meaning T x T) or "TxS".
std::optional<std::vector<Horizon>> to_horizons(const std::string& s) {
  std::vector<Horizon> out;
  if (trim(s).empty()) return out;
  for (const auto& item : split_list(s)) {
    const auto x = item.find('x');
    if (x == std::string::npos) {
      const auto v = to_double(item);
      if (!v) return std::nullopt;
      out.push_back({*v, *v});
    } else {
      const auto t = to_double(trim(std::string_view(item).substr(0, x)));
      const auto u = to_double(trim(std::string_view(item).substr(x + 1)));
      if (!t || !u) return std::nullopt;
      out.push_back({*t, *u});
    }
  }
  return out;
}

std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

std::string format_horizons(const std::vector<Horizon>& hs) {
  std::string out;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_double(hs[i].t) + "x" + format_double(hs[i].s);
  }
  return out;
}

bool open_unit_half_to_one(double h) { return std::isfinite(h) && h > 0.5 && h < 1.0; }

void validate_exponent(const char* name, double h, const ExperimentConfig& cfg, std::vector<std::string>& violations,
                       std::vector<std::string>& warnings) {
  if (!open_unit_half_to_one(h)) {
    violations.push_back(std::string(name) + " = " + format_short(h) + " must lie in (1/2, 1)");
    return;
  }
  if (in_theorem_regime(h)) return;
  const std::string note = std::string(name) + " = " + format_short(h) +
                           " is outside the theorem regime (1/2, 5/8)";
  if (requires_theorem_regime(cfg.kind)) {
    violations.push_back(note + " required by " + std::string(kind_name(cfg.kind)));
  } else if (warns_outside_theorem_regime(cfg.kind)) {
    warnings.push_back(note + "; results of " + std::string(kind_name(cfg.kind)) +
                       " are not covered by the limit theory");
  }
}

void validate_grids(const ExperimentConfig& cfg, std::vector<std::string>& violations) {
  if (cfg.horizons.empty()) {
    violations.push_back("grid.horizons must list at least one horizon");
    return;
  }
  if (!(std::isfinite(cfg.cell_step) && cfg.cell_step > 0.0)) {
    violations.push_back("grid.cell_step = " + format_short(cfg.cell_step) + " must be > 0");
    return;
  }
  const bool chaos = is_chaos_exact(cfg.kind);
  const bool sim = is_simulation(cfg.kind);
  for (const auto& h : cfg.horizons) {
    const std::string label = format_short(h.t) + "x" + format_short(h.s);
    if (!(std::isfinite(h.t) && std::isfinite(h.s) && h.t > 0.0 && h.s > 0.0)) {
      violations.push_back("horizon " + label + " must have T, S > 0");
      continue;
    }
    if (cfg.kind == ExperimentKind::kVarianceScaling && !(h.t > 1.0 && h.s > 1.0)) {
      violations.push_back("horizon " + label + ": variance scaling needs T, S > 1");
    }
    std::optional<GridSpec> grid;
    try {
      grid = GridSpec::with_step(h.t, h.s, cfg.cell_step);
    } catch (const Error&) {
      violations.push_back("horizon " + label + " is not an integer multiple of grid.cell_step = " +
                           format_short(cfg.cell_step));
      continue;
    }
    if (cfg.allow_large_grid || (!chaos && !sim)) continue;
    const int cap = chaos ? kChaosCellCap : kSimulationCellCap;
    const int n = std::max(grid->cells_t(), grid->cells_s());
    if (n > cap) {
      const double cells = static_cast<double>(grid->num_cells());
      const double flops = chaos ? cells * cells * cells : cells * cells * static_cast<double>(cfg.replications);
      char cost[64];
      std::snprintf(cost, sizeof cost, "%.1e", flops);
      violations.push_back("horizon " + label + " with cell step " + format_short(cfg.cell_step) + " gives " +
                           std::to_string(grid->cells_t()) + " x " + std::to_string(grid->cells_s()) +
                           " cells, above the cap of " + std::to_string(cap) + " per direction for " +
                           std::string(kind_name(cfg.kind)) + " (about " + cost +
                           " floating point operations); use --i-know-this-is-slow to run anyway");
    }
  }
}

void validate(ExperimentConfig& cfg, std::vector<std::string>& violations) {
  std::vector<std::string> warnings;
  validate_exponent("alpha", cfg.alpha, cfg, violations, warnings);
  validate_exponent("beta", cfg.beta, cfg, violations, warnings);
  if (!(std::isfinite(cfg.theta) && cfg.theta > 0.0)) {
    violations.push_back("theta = " + format_short(cfg.theta) + " must be > 0");
  }
  validate_grids(cfg, violations);
  if (cfg.replications < 1) {
    violations.push_back("run.replications = " + std::to_string(cfg.replications) + " must be >= 1");
  }
  if (cfg.kind == ExperimentKind::kSimulate && cfg.replications < 2) {
    violations.push_back("run.replications must be >= 2 for simulate (sample covariances)");
  }
  if (!(std::isfinite(cfg.epsilon) && cfg.epsilon >= 0.0)) {
    violations.push_back("run.epsilon = " + format_short(cfg.epsilon) + " must be >= 0");
  }
  if (cfg.samples < 2) violations.push_back("run.samples = " + std::to_string(cfg.samples) + " must be >= 2");
  if (cfg.output_path.empty()) violations.push_back("run.output must not be empty");
  if (cfg.bessel_points < 1) {
    violations.push_back("run.bessel_points = " + std::to_string(cfg.bessel_points) + " must be >= 1");
  }
  if (cfg.kind == ExperimentKind::kLemmaIntegral) {
    if (cfg.alphas.empty()) violations.push_back("run.alphas must not be empty");
    if (cfg.betas.empty()) violations.push_back("run.betas must not be empty");
    for (double a : cfg.alphas) {
      if (!open_unit_half_to_one(a)) violations.push_back("run.alphas entry " + format_short(a) + " must lie in (1/2, 1)");
    }
    for (double b : cfg.betas) {
      if (!open_unit_half_to_one(b)) violations.push_back("run.betas entry " + format_short(b) + " must lie in (1/2, 1)");
    }
  }
  cfg.warnings = std::move(warnings);
}

}  // namespace

ExperimentConfig build_config(const ConfigDocument& doc) {
  std::vector<std::string> violations;
  const auto& keys = known_keys();
  for (const auto& [key, entry] : doc.entries()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      const std::string where = entry.line > 0 ? " (line " + std::to_string(entry.line) + ")" : "";
      violations.push_back("unknown key '" + key + "'" + where);
    }
  }

  ExperimentConfig cfg;
  Reader r(doc, violations);
  const auto* kind_entry = r.find("kind");
  if (kind_entry == nullptr) {
    violations.push_back("'kind' is required");
  } else if (const auto k = parse_kind(kind_entry->value)) {
    cfg.kind = *k;
  } else {
    std::string msg = "unknown experiment kind '" + kind_entry->value + "'; expected one of";
    for (const auto& k2 : kKinds) msg += " " + std::string(k2.name);
    if (kind_entry->line > 0) throw ParseError(msg, kind_entry->line, kind_entry->column);
    violations.push_back(msg);
  }

  r.read("seed", cfg.seed, to_integer<std::uint64_t>, "a nonnegative integer");
  r.read("model.alpha", cfg.alpha, to_double, "a number");
  r.read("model.beta", cfg.beta, to_double, "a number");
  r.read("model.theta", cfg.theta, to_double, "a number");
  r.read("grid.horizons", cfg.horizons, to_horizons, "a comma separated list of T or TxS");
  r.read("grid.cell_step", cfg.cell_step, to_double, "a number");
  r.read("run.replications", cfg.replications, to_integer<int>, "an integer");
  r.read("run.epsilon", cfg.epsilon, to_double, "a number");
  r.read("run.output", cfg.output_path, [](const std::string& s) { return std::optional<std::string>(s); },
         "a path");
  r.read("run.samples", cfg.samples, to_integer<std::int64_t>, "an integer");
  r.read("run.alphas", cfg.alphas, to_double_list, "a comma separated list of numbers");
  r.read("run.betas", cfg.betas, to_double_list, "a comma separated list of numbers");
  r.read("run.bessel_points", cfg.bessel_points, to_integer<int>, "an integer");
  r.read("run.allow_large_grid", cfg.allow_large_grid, to_bool, "true or false");
  r.read("run.timing", cfg.timing, to_bool, "true or false");

  validate(cfg, violations);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return cfg;
}

ExperimentConfig parse_config(std::string_view source) { return build_config(ConfigDocument::parse(source)); }

std::string canonical_config_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "kind = " << kind_name(cfg.kind) << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "\n[model]\n";
  out << "alpha = " << format_double(cfg.alpha) << "\n";
  out << "beta = " << format_double(cfg.beta) << "\n";
  out << "theta = " << format_double(cfg.theta) << "\n";
  out << "\n[grid]\n";
  out << "horizons = " << format_horizons(cfg.horizons) << "\n";
  out << "cell_step = " << format_double(cfg.cell_step) << "\n";
  out << "\n[run]\n";
  out << "replications = " << cfg.replications << "\n";
  out << "epsilon = " << format_double(cfg.epsilon) << "\n";
  out << "output = " << cfg.output_path << "\n";
  out << "samples = " << cfg.samples << "\n";
  out << "alphas = " << format_list(cfg.alphas) << "\n";
  out << "betas = " << format_list(cfg.betas) << "\n";
  out << "bessel_points = " << cfg.bessel_points << "\n";
  out << "allow_large_grid = " << (cfg.allow_large_grid ? "true" : "false") << "\n";
  out << "timing = " << (cfg.timing ? "true" : "false") << "\n";
  return out.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string body = canonical_config_text(cfg);
  std::string object = "blob " + std::to_string(body.size());
  object.push_back('\0');
  object += body;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(object.data(), object.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw Error("config_hash: SHA-1 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

std::string library_version() { return FOU_SHEET_VERSION; }

// ---------------------------------------------------------------------------
// Experiments

namespace {

std::vector<GridSpec> grids_of(const ExperimentConfig& cfg) {
  std::vector<GridSpec> grids;
  for (const auto& h : cfg.horizons) grids.push_back(GridSpec::with_step(h.t, h.s, cfg.cell_step));
  return grids;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

std::uint64_t horizon_stream(std::size_t k, std::uint64_t r) { return (static_cast<std::uint64_t>(k) << 32) | r; }

void run_simulate(const ExperimentConfig& cfg, RunReport& rep, int workers) {
  const HurstPair hurst(cfg.alpha, cfg.beta);
  const ou::DriftParam theta(cfg.theta);
  Table t{"simulate",
          {"T", "S", "cells_t", "cells_s", "corner_var", "corner_var_se", "corner_var_exact", "solver_sup_distance",
           "langevin_residual"},
          {}};
  const auto grids = grids_of(cfg);
  for (std::size_t k = 0; k < grids.size(); ++k) {
    const GridSpec& g = grids[k];
    const fbs::SheetSampler sampler(g, hurst);
    std::vector<SheetPath> paths(static_cast<std::size_t>(cfg.replications));
    parallel_for(
        paths.size(), [&](std::size_t r) { paths[r] = sampler.sample(cfg.seed, horizon_stream(k, r)).second; },
        workers);
    const fbs::NodePair corner{g.cells_t(), g.cells_s(), g.cells_t(), g.cells_s()};
    const auto est = fbs::empirical_cov(paths, std::span<const fbs::NodePair>(&corner, 1)).front();
    const double exact = std::pow(g.horizon_t(), 2.0 * cfg.alpha) * std::pow(g.horizon_s(), 2.0 * cfg.beta);

    const SheetIncrements incr = sampler.sample_increments(cfg.seed, horizon_stream(k, 0));
    const SheetPath by_kernel = ou::solve_by_kernel(incr, g, cfg.theta);
    const SheetPath by_fixed_point = ou::solve_by_fixed_point(cumulate(incr), g, theta);
    const double distance = (by_kernel.values - by_fixed_point.values).cwiseAbs().maxCoeff();
    const double residual = ou::langevin_residual(by_kernel, cumulate(incr), g, theta);

    t.rows.push_back({g.horizon_t(), g.horizon_s(), static_cast<double>(g.cells_t()),
                      static_cast<double>(g.cells_s()), est.estimate, est.standard_error, exact, distance, residual});
    rep.plot.push_back({g.horizon_t(), "corner_var", est.estimate, est.standard_error});
    rep.plot.push_back({g.horizon_t(), "corner_var_exact", exact, 0.0});
    rep.plot.push_back({g.horizon_t(), "solver_sup_distance", distance, 0.0});
  }
  rep.tables.push_back(std::move(t));
}

void run_estimate(const ExperimentConfig& cfg, RunReport& rep) {
  const HurstPair hurst(cfg.alpha, cfg.beta);
  const ou::DriftParam theta(cfg.theta);
  Table t{"estimate",
          {"T", "S", "theta_hat", "nominator", "denominator", "trace_correction", "theta_hat_pathwise",
           "theta_hat_pathwise_cells"},
          {}};
  const auto grids = grids_of(cfg);
  for (std::size_t k = 0; k < grids.size(); ++k) {
    const GridSpec& g = grids[k];
    const fbs::SheetSampler sampler(g, hurst);
    const est::OracleEstimator oracle(g, hurst, theta);
    const SheetIncrements incr = sampler.sample_increments(cfg.seed, horizon_stream(k, 0));
    const est::EstimateResult res = oracle.estimate(incr, cfg.seed);
    const est::EstimateResult node = est::lse_pathwise(ou::solve_by_kernel(incr, g, cfg.theta), g);
    const est::EstimateResult cells = est::lse_pathwise_cells(oracle, incr, cfg.seed);
    t.rows.push_back({g.horizon_t(), g.horizon_s(), res.theta_hat, res.nominator, res.denominator,
                      oracle.trace_correction(), node.theta_hat, cells.theta_hat});
    rep.plot.push_back({g.horizon_t(), "theta_hat", res.theta_hat, 0.0});
    rep.plot.push_back({g.horizon_t(), "theta_hat_pathwise", node.theta_hat, 0.0});
  }
  rep.tables.push_back(std::move(t));
}

void run_consistency(const ExperimentConfig& cfg, RunReport& rep, int workers) {
  const HurstPair hurst(cfg.alpha, cfg.beta);
  const auto report =
      est::mc_consistency(grids_of(cfg), hurst, ou::DriftParam(cfg.theta), cfg.replications, cfg.seed, workers);
  Table t{"consistency", {"T", "S", "median_abs_error", "iqr_abs_error", "mean_error", "iqr_error", "failures"}, {}};
  std::vector<double> medians;
  for (const auto& h : report.horizons) {
    t.rows.push_back({h.grid.horizon_t(), h.grid.horizon_s(), h.median_abs_error, h.iqr_abs_error, h.mean_error,
                      h.iqr_error, static_cast<double>(h.failures)});
    medians.push_back(h.median_abs_error);
    // Normal-theory standard error of a median, 1.2533 sigma / sqrt(n), with sigma = IQR / 1.349.
    const double n = static_cast<double>(h.errors.size());
    rep.plot.push_back({h.grid.horizon_t(), "median_abs_error", h.median_abs_error,
                        n > 0 ? 1.2533 * h.iqr_abs_error / (1.349 * std::sqrt(n)) : 0.0});
  }
  rep.tables.push_back(std::move(t));
  rep.checks["batch_ok"] = report.batch_ok();
  rep.checks["median_abs_error_strictly_decreasing"] = strictly_decreasing(medians);
}

void run_variance_scaling(const ExperimentConfig& cfg, RunReport& rep) {
  const HurstPair hurst(cfg.alpha, cfg.beta);
  const ou::DriftParam theta(cfg.theta);
  Table t{"variance-scaling", {"T", "S", "sigma2", "scaled_eps0", "scaled_eps"}, {}};
  std::vector<double> eps0;
  std::vector<double> eps;
  for (const GridSpec& g : grids_of(cfg)) {
    const auto h = chaos::kernel_matrix(g, theta);
    const double sigma2 = chaos::variance_f(h, fbs::increment_cov(g, hurst));
    eps0.push_back(sigma2 * chaos::variance_scaling_factor(g.horizon_t(), g.horizon_s(), hurst, 0.0));
    eps.push_back(sigma2 * chaos::variance_scaling_factor(g.horizon_t(), g.horizon_s(), hurst, cfg.epsilon));
    t.rows.push_back({g.horizon_t(), g.horizon_s(), sigma2, eps0.back(), eps.back()});
    rep.plot.push_back({g.horizon_t(), "scaled_variance_eps0", eps0.back(), 0.0});
    rep.plot.push_back({g.horizon_t(), "scaled_variance_eps", eps.back(), 0.0});
  }
  double max_ratio = 0.0;
  for (std::size_t i = 1; i < eps0.size(); ++i) max_ratio = std::max(max_ratio, eps0[i] / eps0[i - 1]);
  rep.tables.push_back(std::move(t));
  rep.summary["max_consecutive_ratio_eps0"] = max_ratio;
  rep.checks["scaled_eps_strictly_decreasing"] = strictly_decreasing(eps);
}

void run_denominator_growth(const ExperimentConfig& cfg, RunReport& rep) {
  const HurstPair hurst(cfg.alpha, cfg.beta);
  const ou::DriftParam theta(cfg.theta);
  Table t{"denominator-growth", {"T", "S", "mean_denominator", "normalized"}, {}};
  std::vector<double> normalized;
  for (const GridSpec& g : grids_of(cfg)) {
    const auto m = chaos::mean_denominator(g, theta, fbs::increment_cov(g, hurst));
    normalized.push_back(chaos::normalized_denominator(m.mean, g, hurst, cfg.epsilon));
    t.rows.push_back({g.horizon_t(), g.horizon_s(), m.mean, normalized.back()});
    rep.plot.push_back({g.horizon_t(), "normalized_denominator", normalized.back(), 0.0});
  }
  rep.tables.push_back(std::move(t));
  rep.checks["normalized_strictly_increasing"] = strictly_increasing(normalized);
}

void run_normality_gap(const ExperimentConfig& cfg, RunReport& rep) {
  const HurstPair hurst(cfg.alpha, cfg.beta);
  const ou::DriftParam theta(cfg.theta);
  Table t{"normality-gap", {"T", "S", "sigma2", "kappa4", "normality_gap"}, {}};
  std::vector<double> gaps;
  for (const GridSpec& g : grids_of(cfg)) {
    const auto d = chaos::normality_gap(chaos::kernel_matrix(g, theta), fbs::increment_cov(g, hurst));
    gaps.push_back(d.normality_gap);
    t.rows.push_back({g.horizon_t(), g.horizon_s(), d.sigma2, d.kappa4, d.normality_gap});
    rep.plot.push_back({g.horizon_t(), "normality_gap", d.normality_gap, 0.0});
  }
  rep.tables.push_back(std::move(t));
  rep.summary["gap_ratio_last_first"] = gaps.back() / gaps.front();
  rep.checks["gap_last_at_least_half_first"] = gaps.back() >= 0.5 * gaps.front();
}

void run_lemma_integral(const ExperimentConfig& cfg, RunReport& rep, int workers) {
  const auto cells = singular::finiteness_scan(cfg.alphas, cfg.betas, cfg.samples, cfg.seed, workers);
  Table t{"lemma-integral", {"alpha", "beta", "estimate", "standard_error", "theorem_regime"}, {}};
  int failed = 0;
  for (const auto& c : cells) {
    if (!c.result) {
      ++failed;
      rep.warnings.push_back("alpha = " + format_short(c.alpha) + ", beta = " + format_short(c.beta) + ": " +
                             c.error);
      continue;
    }
    t.rows.push_back({c.alpha, c.beta, c.result->estimate, c.result->standard_error,
                      c.result->theorem_regime ? 1.0 : 0.0});
    rep.plot.push_back({c.beta, "I(alpha=" + format_short(c.alpha) + ")", c.result->estimate,
                        c.result->standard_error});
  }
  rep.tables.push_back(std::move(t));
  rep.summary["failed_cells"] = failed;
  // Direction of the estimates along beta for each alpha: +1 increasing, -1 decreasing, 0 mixed.
  for (double a : cfg.alphas) {
    std::vector<double> along;
    for (const auto& c : cells) {
      if (c.alpha == a && c.result) along.push_back(c.result->estimate);
    }
    const double dir = strictly_increasing(along) ? 1.0 : (strictly_decreasing(along) ? -1.0 : 0.0);
    rep.summary["beta_trend(alpha=" + format_short(a) + ")"] = dir;
  }
}

void run_bessel_check(const ExperimentConfig& cfg, RunReport& rep) {
  RandomStream rng(cfg.seed, 0, stream_domain::kBesselCheck);
  Table t{"bessel-check", {"x", "series", "integral", "abs_diff"}, {}};
  double max_diff = 0.0;
  for (int i = 0; i < cfg.bessel_points; ++i) {
    const double x = 25.0 * rng.uniform();
    const double a = specfun::j0_series(x);
    const double b = specfun::j0_integral(x);
    const double diff = std::abs(a - b);
    max_diff = std::max(max_diff, diff);
    t.rows.push_back({x, a, b, diff});
    rep.plot.push_back({x, "abs_diff", diff, 0.0});
  }
  rep.tables.push_back(std::move(t));
  rep.summary["max_abs_diff"] = max_diff;
  rep.checks["max_abs_diff_below_1e-10"] = max_diff < 1e-10;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg, int workers) {
  if (workers < 1) workers = worker_count();
  RunReport rep;
  rep.config = cfg;
  rep.config_hash = config_hash(cfg);
  rep.library_version = library_version();
  rep.warnings = cfg.warnings;
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (cfg.kind) {
      case ExperimentKind::kSimulate:
        run_simulate(cfg, rep, workers);
        break;
      case ExperimentKind::kEstimate:
        run_estimate(cfg, rep);
        break;
      case ExperimentKind::kConsistency:
        run_consistency(cfg, rep, workers);
        break;
      case ExperimentKind::kVarianceScaling:
        run_variance_scaling(cfg, rep);
        break;
      case ExperimentKind::kDenominatorGrowth:
        run_denominator_growth(cfg, rep);
        break;
      case ExperimentKind::kNormalityGap:
        run_normality_gap(cfg, rep);
        break;
      case ExperimentKind::kLemmaIntegral:
        run_lemma_integral(cfg, rep, workers);
        break;
      case ExperimentKind::kBesselCheck:
        run_bessel_check(cfg, rep);
        break;
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ExperimentError(std::string(kind_name(cfg.kind)) + ": " + e.what());
  }
  if (cfg.timing) {
    rep.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Output

std::string report_json(const RunReport& report) {
  using nlohmann::ordered_json;
  const ExperimentConfig& c = report.config;
  ordered_json cfg;
  cfg["kind"] = kind_name(c.kind);
  cfg["seed"] = c.seed;
  cfg["alpha"] = c.alpha;
  cfg["beta"] = c.beta;
  cfg["theta"] = c.theta;
  ordered_json horizons = ordered_json::array();
  for (const auto& h : c.horizons) horizons.push_back({h.t, h.s});
  cfg["horizons"] = horizons;
  cfg["cell_step"] = c.cell_step;
  cfg["replications"] = c.replications;
  cfg["epsilon"] = c.epsilon;
  cfg["output"] = c.output_path;
  cfg["samples"] = c.samples;
  cfg["alphas"] = c.alphas;
  cfg["betas"] = c.betas;
  cfg["bessel_points"] = c.bessel_points;
  cfg["allow_large_grid"] = c.allow_large_grid;
  cfg["timing"] = c.timing;

  ordered_json doc;
  doc["schema_version"] = RunReport::kSchemaVersion;
  doc["library_version"] = report.library_version;
  doc["config_hash"] = report.config_hash;
  doc["config"] = cfg;
  doc["config_text"] = canonical_config_text(c);
  doc["warnings"] = report.warnings;
  ordered_json tables = ordered_json::array();
  for (const auto& t : report.tables) {
    ordered_json jt;
    jt["name"] = t.name;
    jt["columns"] = t.columns;
    jt["rows"] = t.rows;
    tables.push_back(std::move(jt));
  }
  doc["tables"] = tables;
  doc["summary"] = ordered_json::object();
  for (const auto& [k, v] : report.summary) doc["summary"][k] = v;
  doc["checks"] = ordered_json::object();
  for (const auto& [k, v] : report.checks) doc["checks"][k] = v;
  if (report.wall_clock_seconds) doc["wall_clock_seconds"] = *report.wall_clock_seconds;
  return doc.dump(2) + "\n";
}

std::string report_csv(const RunReport& report) {
  std::string out = "experiment,x,metric,value,error\n";
  const std::string kind(kind_name(report.config.kind));
  for (const auto& row : report.plot) {
    std::string metric = row.metric;
    if (metric.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (char ch : metric) {
        if (ch == '"') quoted += '"';
        quoted += ch;
      }
      metric = quoted + "\"";
    }
    out += kind + "," + format_double(row.x) + "," + metric + "," + format_double(row.value) + "," +
           format_double(row.error) + "\n";
  }
  return out;
}

namespace {

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << contents;
  f.flush();
  if (!f) throw IoError("failed writing '" + path + "'");
}

}  // namespace

void write_report(const RunReport& report, const std::string& base) {
  std::string stem = base;
  if (stem.size() > 5 && stem.compare(stem.size() - 5, 5, ".json") == 0) stem.resize(stem.size() - 5);
  if (stem.empty()) throw IoError("write_report: empty output path");
  write_file(stem + ".json", report_json(report));
  write_file(stem + ".csv", report_csv(report));
}

std::string read_report_hash(std::string_view json_text) {
  try {
    const auto doc = nlohmann::json::parse(json_text);
    return doc.at("config_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report is not valid: ") + e.what(), 1, 1);
  }
}

}  // namespace fou::harness
