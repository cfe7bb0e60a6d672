// fou-sheet <kind> [--config path] [--seed N] [--out base] [overrides]
//
// Exit codes: 0 success, 1 invalid configuration, 2 runtime failure, 3 I/O failure.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fou_sheet/errors.hpp"
#include "fou_sheet/harness.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitIo = 3;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw fou::IoError("cannot read config '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  using fou::harness::ConfigDocument;

  CLI::App app{"Simulation and estimation experiments for the fractional Ornstein-Uhlenbeck sheet", "fou-sheet"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", fou::harness::library_version());

  for (auto kind : fou::harness::all_kinds()) {
    app.add_subcommand(std::string(fou::harness::kind_name(kind)), "run the " +
                                                                      std::string(fou::harness::kind_name(kind)) +
                                                                      " experiment");
  }

  std::string config_path;
  std::map<std::string, std::string> overrides;
  bool slow = false;
  bool timing = false;
  app.add_option("--config", config_path, "experiment config file (key = value with [model], [grid], [run])");

  // flag name -> document key; values are validated together with the file.
  const std::pair<const char*, const char*> kOverrides[] = {
      {"--seed", "seed"},
      {"--out", "run.output"},
      {"--alpha", "model.alpha"},
      {"--beta", "model.beta"},
      {"--theta", "model.theta"},
      {"--horizons", "grid.horizons"},
      {"--cell-step", "grid.cell_step"},
      {"--replications", "run.replications"},
      {"--epsilon", "run.epsilon"},
      {"--samples", "run.samples"},
      {"--alphas", "run.alphas"},
      {"--betas", "run.betas"},
      {"--bessel-points", "run.bessel_points"},
  };
  for (const auto& [flag, key] : kOverrides) {
    app.add_option_function<std::string>(
        flag, [&overrides, key = std::string(key)](const std::string& v) { overrides[key] = v; },
        "override " + std::string(key));
  }
  app.add_flag("--i-know-this-is-slow", slow, "lift the per-direction cell caps");
  app.add_flag("--timing", timing, "record wall-clock time in the report (breaks byte-identical output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  const std::string kind = app.get_subcommands().front()->get_name();
  try {
    ConfigDocument doc = config_path.empty() ? ConfigDocument{} : ConfigDocument::parse(read_file(config_path));
    doc.set("kind", kind);
    for (const auto& [key, value] : overrides) doc.set(key, value);
    if (slow) doc.set("run.allow_large_grid", "true");
    if (timing) doc.set("run.timing", "true");

    const auto cfg = fou::harness::build_config(doc);
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
    const auto report = fou::harness::run_experiment(cfg);
    fou::harness::write_report(report, cfg.output_path);

    std::cout << kind << ": wrote " << cfg.output_path << ".json and " << cfg.output_path << ".csv (config "
              << report.config_hash.substr(0, 12) << ")\n";
    for (const auto& [name, ok] : report.checks) std::cout << "  " << name << ": " << (ok ? "yes" : "no") << "\n";
    for (const auto& [name, value] : report.summary) std::cout << "  " << name << " = " << value << "\n";
    return 0;
  } catch (const fou::ParseError& e) {
    std::cerr << "error: " << (config_path.empty() ? std::string() : config_path + ": ") << e.what() << "\n";
    return kExitValidation;
  } catch (const fou::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fou::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
