#pragma once

#include <numbers>

namespace levitrap::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double mu0 = 1.25663706212e-6;        // T m / A
inline constexpr double eps0 = 8.8541878128e-12;       // F / m
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double k_B = 1.380649e-23;            // J / K
inline constexpr double mu_B = 9.2740100783e-24;       // J / T
inline constexpr double g_e = 2.00231930436;           // electron g-factor magnitude
inline constexpr double flux_quantum = 2.067833848e-15;  // Wb
inline constexpr double atomic_mass = 1.66053906660e-27;  // kg
inline constexpr double avogadro = 6.02214076e23;      // 1 / mol
inline constexpr double standard_gravity = 9.80665;    // m / s^2

// Lower critical field of niobium near T = 0, as mu0*Hc1.
inline constexpr double nb_lower_critical_field = 0.17;  // T

}  // namespace levitrap::constants
