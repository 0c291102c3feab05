// levitrap: batch runner for the levitated-magnet trap and sensitivity models.
#include <iostream>

#include <CLI11.hpp>

#include "levitrap/config.hpp"
#include "levitrap/runner.hpp"

namespace {

int report_config_error(const std::string& path, const levitrap::ConfigError& e) {
  std::cerr << path;
  if (e.line() > 0) std::cerr << ':' << e.line();
  std::cerr << ": error";
  if (!e.field().empty()) std::cerr << " at " << e.field();
  std::cerr << ": " << e.what() << '\n';
  return levitrap::exit_code::config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meissner-levitated magnet trap, noise and sensitivity calculator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  int threads = -1;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("-o,--output-dir", output_dir, "Override output_dir from the config");
  run->add_option("-j,--threads", threads, "Override the worker count (0 = all cores)")->check(CLI::NonNegativeNumber);

  auto* validate = app.add_subcommand("validate", "Check a config and print it fully resolved");
  validate->add_option("config", config_path, "Config file")->required();

  std::string preset_name;
  auto* preset = app.add_subcommand("preset", "Print a built-in config");
  preset->add_option("name", preset_name, "Preset name (paper-sm5)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : levitrap::exit_code::usage;
  }

  try {
    if (*preset) {
      std::cout << levitrap::preset_config(preset_name);
      return 0;
    }
    levitrap::ExperimentConfig cfg = levitrap::load_config(config_path);
    if (*validate) {
      std::cout << levitrap::dump_config(cfg);
      return 0;
    }
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (threads >= 0) cfg.threads = threads;

    const levitrap::RunReport report = levitrap::run_experiment(cfg, std::cerr);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& f : report.outputs) std::cout << f.string() << '\n';
    if (report.exit_code == levitrap::exit_code::solver) std::cerr << "error: solver failure\n";
    return report.exit_code;
  } catch (const levitrap::ConfigError& e) {
    return report_config_error(*preset ? std::string("preset") : config_path, e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return levitrap::exit_code::solver;
  }
}
