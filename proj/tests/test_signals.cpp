#include <doctest.h>

#include "approx.hpp"

#include <cmath>

#include "levitrap/constants.hpp"
#include "levitrap/error.hpp"
#include "levitrap/signals.hpp"

using namespace levitrap;
using constants::pi;

namespace {

ModeParams modes(double kappa) {
  ModeParams p;
  p.mass = 3.06e-17;
  p.inertia = 1.22e-31;
  p.omega_x = 2 * pi * 175;
  p.omega_y = 2 * pi * 304;
  p.omega_z = 2 * pi * 341;
  p.omega_beta = 2 * pi * 22535;
  p.kappa = kappa;
  p.gamma = {1e-3, 1e-3, 1e-3, 1e-3, 1e-3};
  p.omega_mu = 2e5;
  return p;
}

MagnetSpec magnet(double radius) {
  MagnetSpec m;
  m.radius = radius;
  return m;
}

}  // namespace

TEST_CASE("inclination") {
  const ModeParams p = modes(2.4e-16);
  const double g = 9.81, w = 2 * pi * 17.5;
  const auto zero = inclination_psd(0.0, 1e-20, p, g, w);
  CHECK(zero[0] == 0.0);
  const auto s = inclination_psd(1e-20, 1e-20, p, g, w);
  CHECK(s[0] == rel(std::pow(p.mass * g, 2) * 1e-20));

  // Without kappa the y channel reduces to the plain weight.
  const auto d = inclination_psd(1e-20, 1e-20, modes(0.0), g, w);
  CHECK(d[1] == rel(std::pow(p.mass * g, 2) * 1e-20).epsilon(1e-12));
  CHECK(s[1] != rel(d[1]));

  const auto twice = inclination_psd(2e-20, 2e-20, p, g, w);
  CHECK(twice[0] == rel(2 * s[0]));
  CHECK(twice[1] == rel(2 * s[1]));
}

TEST_CASE("surface vibration") {
  const ModeParams p = modes(2.4e-16);
  // Static limit: trap and readout move together, |2 M wx^2|^2 S.
  const auto s = vibration_psd({1.0, 1.0, 1.0}, p, 1e-6 * p.omega_x);
  CHECK(s[0] == rel(std::pow(2 * p.mass * p.omega_x * p.omega_x, 2)).epsilon(1e-9));
  CHECK(s[2] == rel(std::pow(2 * p.mass * p.omega_z * p.omega_z, 2)).epsilon(1e-9));

  // The y channel carries the kappa term of the coupled block.
  const double w = 0.3 * p.omega_y;
  const Matrix5c chi = build_susceptibility(p, w).chi;
  const auto fy = (chi(1, 1) * p.mass * p.omega_y * p.omega_y + chi(1, 4) * p.kappa + 1.0) / chi(1, 1);
  CHECK(vibration_psd({0, 2.0, 0}, p, w)[1] == rel(2 * std::norm(fy)));
}

TEST_CASE("field gradient") {
  CHECK(gradient_psd(1e-30, 2.0) == rel(4e-30));
  CHECK(gradient_psd(1e-30, 4.0) == rel(4 * gradient_psd(1e-30, 2.0)));
  CHECK(gradient_psd(0.0, 4.0) == 0.0);
}

TEST_CASE("surface-fluctuation force") {
  const MagnetSpec m = magnet(10e-6);
  const double w = 2 * pi * 25;
  const double rho = 1.6e-8;

  SUBCASE("decays with distance") {
    double last = INFINITY;
    for (double d : {11e-6, 15e-6, 30e-6, 100e-6, 1e-3}) {
      const double f = casimir_force(m, {rho, d}, w);
      CHECK(f > 0.0);
      CHECK(f < last);
      last = f;
    }
    CHECK(casimir_force(m, {rho, 1.0}, w) < 1e-6 * casimir_force(m, {rho, 11e-6}, w));
  }
  SUBCASE("scales as one over the square root of the resistivity") {
    CHECK(casimir_force(m, {4 * rho, 20e-6}, w) == rel(casimir_force(m, {rho, 20e-6}, w) / 2));
  }
  SUBCASE("far-field expansion") {
    // 1/sqrt(d - u) expanded in u = R sin(t) cos(p); the odd terms survive:
    // F = R^2 M sqrt(C/d) [2 pi/3 (R/d) + pi/4 (R/d)^3 + ...].
    const double d = 20 * m.radius;
    const double c = casimir_constant(rho, w);
    const double k = m.radius / d;
    const double expected = m.radius * m.radius * m.magnetization_density * std::sqrt(c / d) *
                            (2 * pi / 3 * k + pi / 4 * k * k * k);
    CHECK(casimir_force(m, {rho, d}, w) == rel(expected).epsilon(1e-4));
  }
  SUBCASE("surface inside the magnet") { CHECK_THROWS_AS(casimir_force(m, {rho, 10e-6}, w), Error); }
}

TEST_CASE("detectability distance") {
  const MagnetSpec m = magnet(10e-6);
  const double w = 2 * pi * 25;
  const double d = detectability_distance(m, 1.6e-8, 3.5e-21, w);
  CHECK(d == rel(25e-6).epsilon(0.3));
  CHECK(casimir_force(m, {1.6e-8, d}, w) == rel(3.5e-21).epsilon(1e-9));
  CHECK(detectability_distance(m, 1.6e-8, 1.75e-21, w) > d);
  CHECK_THROWS_AS(detectability_distance(m, 1.6e-8, 1.0, w), Error);
}
