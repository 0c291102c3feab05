#pragma once

#include <array>

#include "levitrap/dynamics.hpp"
#include "levitrap/trap.hpp"

namespace levitrap {

/// Conducting plane parallel to y-z at x = distance from the magnet centre.
struct CasimirSurface {
  double resistivity = 1.6e-8;  // Ohm m (silver)
  double distance = 0.0;        // m

  void validate() const;
};

/// Force PSDs (x, y) from surface tilt PSDs (rad^2/Hz) at angular frequency omega.
std::array<double, 2> inclination_psd(double s_tilt_gamma, double s_tilt_beta, const ModeParams& p,
                                      double gravity, double omega);

/// Force PSDs (x, y, z) from surface displacement PSDs (m^2/Hz).
std::array<double, 3> vibration_psd(const std::array<double, 3>& s_disp, const ModeParams& p, double omega);

/// Force PSD from a field-gradient PSD (T^2/m^2/Hz) acting on moment mu.
double gradient_psd(double s_gradient, double moment);

/// Spectral field constant C(omega) = mu0^2 omega hbar / (16 pi rho) in the
/// low-frequency limit of the dielectric function.
double casimir_constant(double resistivity, double omega);

/// x-force from magnetic field fluctuations of the surface (N).
double casimir_force(const MagnetSpec& magnet, const CasimirSurface& surf, double omega, int order = 64);

/// Largest distance at which the force exceeds `threshold` (N, 1 Hz bandwidth).
double detectability_distance(const MagnetSpec& magnet, double resistivity, double threshold, double omega,
                              int order = 64);

}  // namespace levitrap
