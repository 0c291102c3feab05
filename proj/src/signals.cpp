#include "levitrap/signals.hpp"

#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "levitrap/constants.hpp"
#include "levitrap/error.hpp"
#include "levitrap/quadrature.hpp"

namespace levitrap {

using constants::pi;

void CasimirSurface::validate() const {
  if (!(resistivity > 0.0)) throw Error(ErrorCode::InvalidArgument, "resistivity must be > 0");
  if (!(distance > 0.0)) throw Error(ErrorCode::InvalidArgument, "surface distance must be > 0");
}

std::array<double, 2> inclination_psd(double s_tilt_gamma, double s_tilt_beta, const ModeParams& p,
                                      double gravity, double omega) {
  const Matrix5c chi = build_susceptibility(p, omega).chi;
  const double mg = p.mass * gravity;
  const std::complex<double> fy =
      (chi(1, 1) * (mg + p.kappa) + chi(1, 4) * p.inertia * p.omega_beta * p.omega_beta) / chi(1, 1);
  return {mg * mg * s_tilt_gamma, std::norm(fy) * s_tilt_beta};
}

std::array<double, 3> vibration_psd(const std::array<double, 3>& s_disp, const ModeParams& p, double omega) {
  const Matrix5c chi = build_susceptibility(p, omega).chi;
  // The trailing 1 is the readout moving with the surface.
  const auto fx = (chi(0, 0) * p.mass * p.omega_x * p.omega_x + 1.0) / chi(0, 0);
  const auto fy = (chi(1, 1) * p.mass * p.omega_y * p.omega_y + chi(1, 4) * p.kappa + 1.0) / chi(1, 1);
  const auto fz = (chi(2, 2) * p.mass * p.omega_z * p.omega_z + 1.0) / chi(2, 2);
  return {std::norm(fx) * s_disp[0], std::norm(fy) * s_disp[1], std::norm(fz) * s_disp[2]};
}

double gradient_psd(double s_gradient, double moment) { return moment * moment * s_gradient; }

double casimir_constant(double resistivity, double omega) {
  // mu0^2 w^2 hbar eps0 Im[eps] / (16 pi) with Im[eps] = 1 / (eps0 w rho).
  return constants::mu0 * constants::mu0 * omega * constants::hbar / (16.0 * pi * resistivity);
}

double casimir_force(const MagnetSpec& magnet, const CasimirSurface& surf, double omega, int order) {
  magnet.validate();
  surf.validate();
  if (!(omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "omega must be > 0");
  const double r = magnet.radius;
  const double d = surf.distance;
  if (d - r < 1e-3 * r) throw Error(ErrorCode::SingularPoint, "surface too close to the magnet");
  const double c = casimir_constant(surf.resistivity, omega);
  const quad::Rule th = quad::gauss_legendre(order, 0.0, pi);
  const quad::Rule ph = quad::gauss_legendre(2 * order, 0.0, 2.0 * pi);
  double sum = 0.0;
  for (std::size_t i = 0; i < th.nodes.size(); ++i) {
    const double s = std::sin(th.nodes[i]);
    for (std::size_t j = 0; j < ph.nodes.size(); ++j) {
      const double cp = std::cos(ph.nodes[j]);
      sum += th.weights[i] * ph.weights[j] * std::sqrt(c / (d - r * s * cp)) * s * s * cp;
    }
  }
  return r * r * magnet.magnetization_density * sum;
}

double detectability_distance(const MagnetSpec& magnet, double resistivity, double threshold, double omega,
                              int order) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be > 0");
  auto excess = [&](double d) { return casimir_force(magnet, {resistivity, d}, omega, order) - threshold; };
  const double lo = magnet.radius * (1.0 + 2e-3);
  if (excess(lo) <= 0.0) throw Error(ErrorCode::NoCrossing, "force stays below the threshold");
  double hi = 2.0 * lo;
  for (int i = 0; excess(hi) > 0.0; ++i) {
    if (i > 200) throw Error(ErrorCode::NoCrossing, "force never drops below the threshold");
    hi *= 2.0;
  }
  boost::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::bisect(
      excess, hi / 2.0 > lo ? hi / 2.0 : lo, hi,
      [](double x, double y) { return std::abs(x - y) < 1e-12 * std::abs(x); }, iters);
  return 0.5 * (a + b);
}

}  // namespace levitrap
