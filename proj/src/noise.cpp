#include "levitrap/noise.hpp"

#include <cmath>
#include <limits>

#include "levitrap/constants.hpp"
#include "levitrap/error.hpp"
#include "levitrap/quadrature.hpp"

namespace levitrap {

using constants::k_B;
using constants::pi;

double Environment::molecular_speed() const {
  const double m = molar_mass / constants::avogadro;
  return speed == ThermalSpeed::Mean ? std::sqrt(8.0 * k_B * temperature / (pi * m))
                                     : std::sqrt(3.0 * k_B * temperature / m);
}

void Environment::validate() const {
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be > 0");
  if (!(pressure >= 0.0)) throw Error(ErrorCode::InvalidArgument, "pressure must be >= 0");
  if (!(molar_mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "molar mass must be > 0");
}

void SquidModel::validate() const {
  if (!(base_noise >= 0.0)) throw Error(ErrorCode::InvalidArgument, "SQUID base noise must be >= 0");
  if (!(reference_side > log_scale && log_scale > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "SQUID reference side must exceed the log scale");
  }
}

double gas_damping(const MagnetSpec& magnet, const Environment& env) {
  env.validate();
  const double r = magnet.radius;
  return 15.8 * r * r * env.pressure / (magnet.mass() * env.molecular_speed());
}

namespace {

// Directional derivative of the dipole H (A/m) along e.
Vec3 dipole_dh(const Vec3& m, const Vec3& r, const Vec3& e) {
  const double r2 = r.squaredNorm();
  const double r5 = r2 * r2 * std::sqrt(r2);
  const double mr = m.dot(r);
  const double re = r.dot(e);
  return (3.0 * m.dot(e) * r + 3.0 * mr * e + 3.0 * re * m - 15.0 * mr * re * r / r2) / (4.0 * pi * r5);
}

}  // namespace

HysteresisLoss hysteresis_damping(const MagnetSpec& magnet, const TrapCharacterization& trap,
                                  const Environment& env, int axis, int order) {
  env.validate();
  if (axis < 0 || axis > 2) throw Error(ErrorCode::InvalidArgument, "axis must be 0, 1 or 2");
  const std::array<double, 3> omegas = {trap.omega_x, trap.omega_y, trap.omega_z};
  const double w = omegas[axis];
  if (!(w > 0.0)) throw Error(ErrorCode::UnstableTrap, "trap frequency must be > 0");

  HysteresisLoss out;
  const double mass = magnet.mass();
  out.amplitude = std::sqrt(k_B * env.temperature / (mass * w * w));
  if (magnet.susceptibility == 0.0) return out;

  // In-plane moment: the image has the same moment, sitting at -z0.
  const Vec3 m(0.0, magnet.moment(), 0.0);
  const Vec3 image(0.0, 0.0, -trap.z0);
  const Vec3 e = Vec3::Unit(axis);
  const double amp = out.amplitude;

  // dH = integral over s in [0, A] of the directional derivative, which
  // avoids the cancellation of H(r + A e) - H(r) when A << z0.
  const quad::Rule path = quad::gauss_legendre(4, 0.0, amp);
  auto delta_h = [&](const Vec3& p) {
    Vec3 acc = Vec3::Zero();
    for (std::size_t k = 0; k < path.nodes.size(); ++k) {
      acc += path.weights[k] * dipole_dh(m, p + path.nodes[k] * e - image, e);
    }
    return acc;
  };

  const double rad = magnet.radius;
  const quad::Rule rr = quad::gauss_legendre(order, 0.0, rad);
  const quad::Rule cc = quad::gauss_legendre(order, -1.0, 1.0);
  const int nphi = 2 * order;
  double integral = 0.0;
  const Vec3 centre(0.0, 0.0, trap.z0);
  for (std::size_t i = 0; i < rr.nodes.size(); ++i) {
    const double r = rr.nodes[i];
    for (std::size_t j = 0; j < cc.nodes.size(); ++j) {
      const double ct = cc.nodes[j];
      const double st = std::sqrt(1.0 - ct * ct);
      for (int k = 0; k < nphi; ++k) {
        const double ph = 2.0 * pi * (k + 0.5) / nphi;
        const Vec3 p = centre + r * Vec3(st * std::cos(ph), st * std::sin(ph), ct);
        integral += rr.weights[i] * cc.weights[j] * (2.0 * pi / nphi) * r * r * delta_h(p).squaredNorm();
      }
    }
  }
  out.mean_square_dh = integral / magnet.volume();
  out.energy_per_cycle = constants::mu0 * magnet.susceptibility * integral;
  out.gamma = w * out.energy_per_cycle / (2.0 * pi * k_B * env.temperature);
  return out;
}

double eddy_loss_ratio(const MagnetSpec& magnet, const TrapCharacterization& trap, const Environment& env,
                       int axis, double omega) {
  const HysteresisLoss h = hysteresis_damping(magnet, trap, env, axis);
  if (h.energy_per_cycle == 0.0) return magnet.conductivity == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  // Conducting sphere in a slowly varying uniform field B cos(wt): the
  // dissipated energy per cycle is 2 pi^2 sigma w B^2 R^5 / 15. The field
  // amplitude is taken as the rms of mu0 dH over the volume.
  const double r = magnet.radius;
  const double b2 = constants::mu0 * constants::mu0 * h.mean_square_dh;
  const double eddy = 2.0 * pi * pi * magnet.conductivity * omega * b2 * std::pow(r, 5) / 15.0;
  return eddy / h.energy_per_cycle;
}

double squid_flux_noise(const SquidModel& model, double side) {
  model.validate();
  if (!(side > 0.0)) throw Error(ErrorCode::InvalidArgument, "loop side must be > 0");
  auto law = [&](double s) { return s * std::log(s / model.log_scale); };
  if (side <= model.reference_side) return model.base_noise;
  return model.base_noise * std::max(1.0, law(side) / law(model.reference_side));
}

double readout_force_noise(double sqrt_s_phi, double eta, std::complex<double> chi_ii) {
  if (eta == 0.0) throw Error(ErrorCode::InvalidArgument, "coupling factor is zero");
  const double chi2 = std::norm(chi_ii);
  if (chi2 == 0.0) throw Error(ErrorCode::InvalidArgument, "susceptibility is zero");
  // S_Phi / (|chi|^2 (Phi0 eta)^2) with S_Phi = (sqrt_s_phi Phi0)^2.
  return sqrt_s_phi * sqrt_s_phi / (chi2 * eta * eta);
}

double thermal_force_psd(double gamma, double mass, double temperature) {
  if (!(gamma >= 0.0 && mass >= 0.0 && temperature >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "thermal PSD inputs must be >= 0");
  }
  return mass * gamma * k_B * temperature / pi;
}

double evaluation_fraction(const NoiseOptions& opt, double radius) {
  return radius <= opt.fraction_switch_radius * (1 + 1e-9) ? opt.fraction_small : opt.fraction_large;
}

SensitivityCurve force_sensitivity(const MagnetSpec& magnet, const TrapCharacterization& trap,
                                   const ReadoutArray& readout, const NoiseOptions& opt,
                                   const std::vector<double>& omegas, int axis) {
  if (axis < 0 || axis > 2) throw Error(ErrorCode::InvalidArgument, "axis must be 0, 1 or 2");
  opt.env.validate();
  SensitivityCurve c;
  c.axis = axis;
  c.omega = omegas;

  const double mass = magnet.mass();
  const double gas = gas_damping(magnet, opt.env);
  Coord5 gamma{};
  double hyst_axis = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double h = hysteresis_damping(magnet, trap, opt.env, i, opt.hysteresis_order).gamma;
    gamma[i] = gas + h;
    if (i == axis) hyst_axis = h;
  }
  gamma[3] = opt.gamma_alpha >= 0.0 ? opt.gamma_alpha : gas;
  gamma[4] = opt.gamma_beta >= 0.0 ? opt.gamma_beta : gas;
  const ModeParams p = ModeParams::from(magnet, trap, gamma);

  const std::array<double, 3> wi = {trap.omega_x, trap.omega_y, trap.omega_z};
  c.gamma_gas = gas;
  c.gamma_hyst = hyst_axis;
  c.quality = wi[axis] / (gas + hyst_axis);
  c.evaluation_omega = evaluation_fraction(opt, magnet.radius) * wi[axis];
  c.eddy_ratio = eddy_loss_ratio(magnet, trap, opt.env, axis, c.evaluation_omega);
  c.squid_noise = squid_flux_noise(opt.squid, readout.side);

  const double jac = opt.apply_hz_jacobian ? 2.0 * pi : 1.0;
  const double s_gas = jac * thermal_force_psd(gas, mass, opt.env.temperature);
  const double s_hyst = jac * thermal_force_psd(hyst_axis, mass, opt.env.temperature);
  for (double w : omegas) {
    const auto chi = build_susceptibility(p, w).chi;
    const double s_sq = readout_force_noise(c.squid_noise, readout.eta[axis], chi(axis, axis));
    c.s_squid.push_back(s_sq);
    c.s_gas.push_back(s_gas);
    c.s_hyst.push_back(s_hyst);
    c.s_total.push_back(s_sq + s_gas + s_hyst);
  }
  c.s_accel = acceleration_sensitivity(c.s_total, mass);
  return c;
}

std::vector<double> acceleration_sensitivity(const std::vector<double>& s_force, double mass) {
  if (!(mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "mass must be > 0");
  std::vector<double> out(s_force.size());
  const double m2 = mass * mass;
  for (std::size_t i = 0; i < s_force.size(); ++i) out[i] = s_force[i] / m2;
  return out;
}

}  // namespace levitrap
