#include <doctest.h>

#include "approx.hpp"

#include <cmath>
#include <map>

#include "levitrap/constants.hpp"
#include "levitrap/error.hpp"
#include "levitrap/noise.hpp"

using namespace levitrap;
using constants::k_B;
using constants::mu0;
using constants::pi;

namespace {

struct Fixture {
  TrapConfig cfg;
  TrapCharacterization trap;
};

// Trap without the depth search, cached per radius.
const Fixture& fixture(double radius) {
  static std::map<double, Fixture> cache;
  auto it = cache.find(radius);
  if (it != cache.end()) return it->second;
  Fixture f;
  f.cfg.magnet.radius = radius;
  const Equilibrium eq = find_equilibrium(f.cfg);
  f.cfg.sc.hole_radius = eq.hole_radius;
  const TrapModel model(f.cfg);
  f.trap = model.characterize(model.equilibrium_height(eq.z0), false);
  return cache.emplace(radius, f).first->second;
}

}  // namespace

TEST_CASE("gas damping") {
  const Fixture& f = fixture(100e-9);
  Environment env;
  const double g = gas_damping(f.cfg.magnet, env);
  CHECK(g == rel(2e-6).epsilon(0.5));
  const double q = f.trap.omega_x / g;
  CHECK(q > 1e8);
  CHECK(q < 1e10);

  Environment twice = env;
  twice.pressure *= 2;
  CHECK(gas_damping(f.cfg.magnet, twice) == rel(2 * g));
  env.pressure = 0;
  CHECK(gas_damping(f.cfg.magnet, env) == 0.0);
}

TEST_CASE("molecular speed conventions") {
  Environment env;
  const double m = env.molar_mass / constants::avogadro;
  CHECK(env.molecular_speed() == rel(std::sqrt(8 * k_B / (pi * m))));
  env.speed = ThermalSpeed::Rms;
  CHECK(env.molecular_speed() == rel(std::sqrt(3 * k_B / m)));
}

TEST_CASE("hysteresis loss against a uniform-field estimate") {
  const Fixture& f = fixture(100e-9);
  const MagnetSpec& m = f.cfg.magnet;
  Environment env;
  const int axis = 2;
  const HysteresisLoss h = hysteresis_damping(m, f.trap, env, axis);

  // For R << z0 the change of the image field is nearly the same all over
  // the sphere, so dH ~ H(c + A e) - H(c) on the centre line. Along x it
  // vanishes at first order, hence the z axis.
  DipoleSource image;
  image.position = Vec3(0, 0, -f.trap.z0);
  image.moment = m.moment();
  const Vec3 c(0, 0, f.trap.z0);
  const Vec3 dh = (dipole_field(image, c + h.amplitude * Vec3::UnitZ()) - dipole_field(image, c)) / mu0;
  const double expected = mu0 * m.susceptibility * m.volume() * dh.squaredNorm();
  CHECK(h.energy_per_cycle == rel(expected).epsilon(0.01));
  CHECK(h.amplitude == rel(std::sqrt(k_B / (m.mass() * f.trap.omega_z * f.trap.omega_z))));
  CHECK(h.gamma == rel(f.trap.omega_z * h.energy_per_cycle / (2 * pi * k_B * env.temperature)));
}

TEST_CASE("hysteresis scales with the amplitude squared") {
  const Fixture& f = fixture(100e-9);
  // Deep in the small-amplitude regime (A << z0), where the loss is quadratic.
  Environment cold, warm;
  cold.temperature = 1e-6;
  warm.temperature = 4 * cold.temperature;  // doubles the thermal amplitude
  const HysteresisLoss a = hysteresis_damping(f.cfg.magnet, f.trap, cold, 2);
  const HysteresisLoss b = hysteresis_damping(f.cfg.magnet, f.trap, warm, 2);
  CHECK(b.energy_per_cycle == rel(4 * a.energy_per_cycle).epsilon(1e-3));
  CHECK(b.gamma == rel(a.gamma).epsilon(1e-3));

  MagnetSpec soft = f.cfg.magnet;
  soft.susceptibility = 0;
  CHECK(hysteresis_damping(soft, f.trap, cold, 1).gamma == 0.0);
}

TEST_CASE("eddy currents") {
  const Fixture& f = fixture(100e-9);
  Environment env;
  const double r1 = eddy_loss_ratio(f.cfg.magnet, f.trap, env, 0, f.trap.omega_x);
  const double r2 = eddy_loss_ratio(f.cfg.magnet, f.trap, env, 0, 2 * f.trap.omega_x);
  CHECK(r2 == rel(2 * r1));
  CHECK(r1 < 1e-2);
  MagnetSpec insulator = f.cfg.magnet;
  insulator.conductivity = 0;
  CHECK(eddy_loss_ratio(insulator, f.trap, env, 0, f.trap.omega_x) == 0.0);
}

TEST_CASE("SQUID flux noise law") {
  SquidModel q;
  CHECK(squid_flux_noise(q, q.reference_side) == q.base_noise);
  double last = 0;
  for (double s : {1e-6, 17e-6, 95e-6, 950e-6, 9500e-6}) {
    const double v = squid_flux_noise(q, s);
    CHECK(v >= last);
    last = v;
  }
  const double s = 9500e-6;
  const double law = (s * std::log(s / q.log_scale)) / (q.reference_side * std::log(q.reference_side / q.log_scale));
  CHECK(squid_flux_noise(q, s) == rel(q.base_noise * law));
}

TEST_CASE("readout force noise") {
  const std::complex<double> chi(2e3, -5e2);
  const double s1 = readout_force_noise(1e-6, 7.3e5, chi);
  CHECK(readout_force_noise(1e-6, 2 * 7.3e5, chi) == rel(s1 / 4));
  CHECK_THROWS_AS(readout_force_noise(1e-6, 0.0, chi), Error);

  // Resonance lowers the readout floor by Q^2 relative to the static value.
  ModeParams p;
  p.mass = 1e-17;
  p.inertia = 1e-31;
  p.omega_x = p.omega_y = p.omega_z = 1e3;
  p.omega_beta = 1e5;
  p.gamma = {1e-2, 1e-2, 1e-2, 1e-2, 1e-2};
  const double q = p.omega_x / p.gamma[0];
  const double at_dc = readout_force_noise(1e-6, 1e6, build_susceptibility(p, 1e-9).chi(0, 0));
  const double at_res = readout_force_noise(1e-6, 1e6, build_susceptibility(p, p.omega_x).chi(0, 0));
  CHECK(at_res / at_dc == rel(1 / (q * q)).epsilon(1e-6));
}

TEST_CASE("thermal force PSD") {
  CHECK(thermal_force_psd(0.0, 1.0, 1.0) == 0.0);
  CHECK(thermal_force_psd(1e-3, 2e-17, 2.0) == rel(2 * thermal_force_psd(1e-3, 2e-17, 1.0)));
  CHECK(thermal_force_psd(1e-3, 2e-17, 1.0) == rel(2e-17 * 1e-3 * k_B / pi));
  CHECK_THROWS_AS(thermal_force_psd(-1.0, 1.0, 1.0), Error);
}

TEST_CASE("sensitivity budget bookkeeping") {
  const Fixture& f = fixture(100e-9);
  const ReadoutArray readout = design_array(100e-9, f.trap.z0);
  NoiseOptions opt;
  const std::vector<double> ws = {0.1 * f.trap.omega_x, f.trap.omega_x, 3 * f.trap.omega_x};
  const SensitivityCurve c = force_sensitivity(f.cfg.magnet, f.trap, readout, opt, ws, 0);
  const double mass = f.cfg.magnet.mass();
  for (std::size_t k = 0; k < ws.size(); ++k) {
    CHECK(c.s_total[k] == c.s_squid[k] + c.s_gas[k] + c.s_hyst[k]);
    CHECK(c.s_accel[k] * mass * mass == rel(c.s_total[k]).epsilon(1e-14));
  }
  CHECK(c.evaluation_omega == rel(0.1 * f.trap.omega_x));
  CHECK(evaluation_fraction(opt, 10e-3) == 0.5);

  SUBCASE("doubling the mass quarters the acceleration PSD") {
    const auto a1 = acceleration_sensitivity(c.s_total, mass);
    const auto a2 = acceleration_sensitivity(c.s_total, 2 * mass);
    CHECK(a2[0] == rel(a1[0] / 4));
  }
  SUBCASE("no noise sources, no noise") {
    NoiseOptions quiet;
    quiet.env.pressure = 0;
    quiet.squid.base_noise = 0;
    MagnetSpec ideal = f.cfg.magnet;
    ideal.susceptibility = 0;
    quiet.gamma_alpha = quiet.gamma_beta = 1.0;  // keep the rotor invertible
    const SensitivityCurve z = force_sensitivity(ideal, f.trap, readout, quiet, {ws[0], ws[2]}, 0);
    for (double s : z.s_total) CHECK(s == 0.0);
  }
}
