#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "levitrap/config.hpp"

namespace levitrap {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int config = 2;
inline constexpr int solver = 3;
}  // namespace exit_code

struct RunReport {
  int exit_code = exit_code::ok;
  std::vector<std::string> warnings;            // per-point failures
  std::vector<std::filesystem::path> outputs;   // files written
};

/// Runs one experiment and writes its CSV files and summary.json into
/// cfg.output_dir. Progress goes to `log`.
RunReport run_experiment(const ExperimentConfig& cfg, std::ostream& log);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& s);

}  // namespace levitrap
