#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "levitrap/trap.hpp"

namespace levitrap {

using Matrix5c = Eigen::Matrix<std::complex<double>, 5, 5>;
using Coord5 = std::array<double, 5>;  // (x, y, z, alpha, beta)

/// Linearised small-oscillation parameters around the trap centre.
struct ModeParams {
  double mass = 0.0;     // kg
  double inertia = 0.0;  // kg m^2
  double omega_x = 0.0, omega_y = 0.0, omega_z = 0.0, omega_beta = 0.0;  // rad/s
  double kappa = 0.0;     // J/(rad m)
  Coord5 gamma{};         // 1/s, (x, y, z, alpha, beta)
  double omega_mu = 0.0;  // rad/s

  static ModeParams from(const MagnetSpec& magnet, const TrapCharacterization& trap, const Coord5& gamma);
  void validate() const;
};

/// hbar mu / (I g_e mu_B).
double omega_mu(const MagnetSpec& magnet);

/// Left-hand side of the linearised equations in the frequency domain.
Matrix5c system_matrix(const ModeParams& p, double omega);

struct SusceptibilityMatrix {
  double omega = 0.0;
  Matrix5c chi;
  double inverse_residual = 0.0;  // max |D (A chi - 1) D^-1|, D the equilibration
  /// At omega = 0 alpha decouples with no restoring force; its row and
  /// column of chi are left at zero and skipped in the residual.
  bool static_alpha_excluded = false;
};

SusceptibilityMatrix build_susceptibility(const ModeParams& p, double omega);

/// Coordinate PSDs for independent force/torque PSDs, S_X_i = sum_j |chi_ij|^2 S_F_j.
std::vector<Coord5> response(const ModeParams& p, const Coord5& force_psd, const std::vector<double>& omegas);

}  // namespace levitrap
