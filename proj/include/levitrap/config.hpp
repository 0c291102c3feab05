#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "levitrap/noise.hpp"
#include "levitrap/trap.hpp"

namespace levitrap {

enum class ExperimentKind { TrapSweep, Sensitivity, Casimir, WireSweep, ReadoutDesign };

const char* to_string(ExperimentKind kind);

struct TrapSweepParams {
  std::vector<double> radii;  // m
  bool mesh_dump = false;     // write (r, theta, g) of the sheet per radius
};

struct SensitivityParams {
  std::vector<double> radii;  // m, within the readout design table
  int axis = 0;
  int spectrum_points = 61;   // per radius; 0 disables the spectrum file
  double spectrum_min_ratio = 0.01;  // relative to the trap frequency
  double spectrum_max_ratio = 10.0;
};

struct CasimirParams {
  double radius = 10e-6;
  double resistivity = 1.6e-8;
  double frequency_hz = 25.0;
  double threshold = 3.5e-21;  // N, 1 Hz bandwidth
  std::vector<double> distances;
  int order = 64;
};

struct WireSweepParams {
  double radius = 100e-9;
  double wire_height = 8e-6;
  std::vector<double> currents;  // A
  bool screened = true;
};

struct ReadoutDesignParams {
  std::vector<double> radii;
  bool include_sheet = false;  // couplings with the sheet response
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Sensitivity;
  std::string output_dir = "levitrap_out";
  int threads = 0;  // 0: hardware concurrency
  TrapConfig trap;  // magnet radius is set per experiment point
  NoiseOptions noise;
  TrapSweepParams trap_sweep;
  SensitivityParams sensitivity;
  CasimirParams casimir;
  WireSweepParams wire_sweep;
  ReadoutDesignParams readout_design;
};

/// Config problem, with the offending field (JSON pointer) and source line when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string field = {}, int line = 0);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_ = 0;
};

/// Defaults of every section, as used by the "paper-sm5" preset.
ExperimentConfig default_config();

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved config as pretty JSON (grids expanded, defaults filled).
std::string dump_config(const ExperimentConfig& cfg);

/// Built-in preset text; throws ConfigError for an unknown name.
std::string preset_config(std::string_view name);

}  // namespace levitrap
