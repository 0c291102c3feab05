#pragma once

#include <vector>

#include "levitrap/dynamics.hpp"
#include "levitrap/readout.hpp"
#include "levitrap/trap.hpp"

namespace levitrap {

enum class ThermalSpeed { Mean, Rms };

struct Environment {
  double temperature = 1.0;       // K
  double pressure = 1e-8;         // Pa
  double molar_mass = 28.97e-3;   // kg/mol
  ThermalSpeed speed = ThermalSpeed::Mean;

  double molecular_speed() const;  // m/s
  void validate() const;
};

/// White SQUID flux noise growing like s log(s / s_u) above the anchor side.
struct SquidModel {
  double base_noise = 1e-6;    // Phi0 / sqrt(Hz)
  double reference_side = 17e-6;  // m
  double log_scale = 0.1e-6;      // m

  void validate() const;
};

double gas_damping(const MagnetSpec& magnet, const Environment& env);

struct HysteresisLoss {
  double amplitude = 0.0;      // thermal amplitude A_i (m)
  double energy_per_cycle = 0.0;  // J
  double gamma = 0.0;          // 1/s
  double mean_square_dh = 0.0;  // volume average of |dH|^2 (A^2/m^2)
};

/// axis: 0 = x, 1 = y, 2 = z. Image of the magnet fixed at -z0.
HysteresisLoss hysteresis_damping(const MagnetSpec& magnet, const TrapCharacterization& trap,
                                  const Environment& env, int axis, int order = 16);

/// Eddy-current over hysteresis loss per cycle at angular frequency omega.
double eddy_loss_ratio(const MagnetSpec& magnet, const TrapCharacterization& trap, const Environment& env,
                       int axis, double omega);

/// sqrt(S_Phi) in Phi0/sqrt(Hz) for loop side s.
double squid_flux_noise(const SquidModel& model, double side);

/// S_F from readout flux noise (N^2/Hz); sqrt_s_phi in Phi0/sqrt(Hz).
double readout_force_noise(double sqrt_s_phi, double eta, std::complex<double> chi_ii);

/// M gamma k_B T / pi.
double thermal_force_psd(double gamma, double mass, double temperature);

struct NoiseOptions {
  Environment env;
  SquidModel squid;
  /// Angular damping rates; negative means "use the gas rate".
  double gamma_alpha = -1.0;
  double gamma_beta = -1.0;
  /// Multiply thermal PSDs by 2 pi when reporting per Hz.
  bool apply_hz_jacobian = false;
  double fraction_small = 0.1;
  double fraction_large = 0.5;
  double fraction_switch_radius = 100e-6;
  int hysteresis_order = 16;
};

struct SensitivityCurve {
  int axis = 0;
  std::vector<double> omega;
  std::vector<double> s_squid, s_gas, s_hyst, s_total;  // N^2/Hz
  std::vector<double> s_accel;                          // (m/s^2)^2/Hz
  double gamma_gas = 0.0;
  double gamma_hyst = 0.0;
  double quality = 0.0;           // omega_i / (gamma_gas + gamma_hyst)
  double evaluation_omega = 0.0;  // fraction * omega_i
  double eddy_ratio = 0.0;        // at the evaluation frequency
  double squid_noise = 0.0;       // Phi0/sqrt(Hz)
};

/// Evaluation frequency fraction for a magnet radius.
double evaluation_fraction(const NoiseOptions& opt, double radius);

/// Readout + gas + hysteresis force PSDs for one axis on an omega grid.
SensitivityCurve force_sensitivity(const MagnetSpec& magnet, const TrapCharacterization& trap,
                                   const ReadoutArray& readout, const NoiseOptions& opt,
                                   const std::vector<double>& omegas, int axis);

/// S_a = S_F / M^2, elementwise.
std::vector<double> acceleration_sensitivity(const std::vector<double>& s_force, double mass);

}  // namespace levitrap
