#include "levitrap/dynamics.hpp"

#include <cmath>

#include "levitrap/constants.hpp"
#include "levitrap/error.hpp"

namespace levitrap {

using cd = std::complex<double>;

double omega_mu(const MagnetSpec& magnet) {
  return constants::hbar * magnet.moment() / (magnet.inertia() * constants::g_e * constants::mu_B);
}

ModeParams ModeParams::from(const MagnetSpec& magnet, const TrapCharacterization& trap, const Coord5& gamma) {
  ModeParams p;
  p.mass = magnet.mass();
  p.inertia = magnet.inertia();
  p.omega_x = trap.omega_x;
  p.omega_y = trap.omega_y;
  p.omega_z = trap.omega_z;
  p.omega_beta = trap.omega_beta;
  p.kappa = trap.kappa;
  p.gamma = gamma;
  p.omega_mu = levitrap::omega_mu(magnet);
  return p;
}

void ModeParams::validate() const {
  if (!(mass > 0.0 && inertia > 0.0)) throw Error(ErrorCode::InvalidArgument, "mass and inertia must be > 0");
  for (double g : gamma) {
    if (!(g >= 0.0)) throw Error(ErrorCode::InvalidArgument, "damping rates must be >= 0");
  }
  if (!(omega_mu >= 0.0)) throw Error(ErrorCode::InvalidArgument, "omega_mu must be >= 0");
}

Matrix5c system_matrix(const ModeParams& p, double w) {
  const cd i(0.0, 1.0);
  const auto& g = p.gamma;
  Matrix5c a = Matrix5c::Zero();
  a(0, 0) = p.mass * (p.omega_x * p.omega_x - w * w - i * w * g[0]);
  a(1, 1) = p.mass * (p.omega_y * p.omega_y - w * w - i * w * g[1]);
  a(2, 2) = p.mass * (p.omega_z * p.omega_z - w * w - i * w * g[2]);
  a(3, 3) = p.inertia * (-w * w - i * w * g[3]);
  a(4, 4) = p.inertia * (p.omega_beta * p.omega_beta - w * w - i * w * g[4]);
  a(1, 4) = a(4, 1) = p.kappa;
  a(3, 4) = i * w * p.omega_mu * p.inertia;
  a(4, 3) = -i * w * p.omega_mu * p.inertia;
  return a;
}

SusceptibilityMatrix build_susceptibility(const ModeParams& p, double w) {
  p.validate();
  if (w == 0.0 && p.gamma[3] == 0.0) {
    // alpha has no restoring term; the static limit is only taken as the
    // limit of a damped rotor.
    throw Error(ErrorCode::SingularMatrix, "free rotation alpha is singular at omega = 0");
  }
  const Matrix5c a = system_matrix(p, w);
  // Invert the three blocks {x}, {z} and {y, alpha, beta} separately so that
  // the structural zeros stay exact.
  Matrix5c chi = Matrix5c::Zero();
  for (int k : {0, 2}) {
    if (a(k, k) == 0.0) throw Error(ErrorCode::SingularMatrix, "undamped resonance");
    chi(k, k) = 1.0 / a(k, k);
  }
  // At omega = 0 the gyroscopic term vanishes and alpha, having no
  // restoring force, drops out: it is left out of the static inverse.
  const bool static_alpha = w == 0.0;
  const std::vector<int> idx = static_alpha ? std::vector<int>{1, 4} : std::vector<int>{1, 3, 4};
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXcd block(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) block(r, c) = a(idx[r], idx[c]);
  }
  // Mass and inertia entries differ by many decades; equilibrate
  // symmetrically before judging conditioning.
  Eigen::VectorXd d(n);
  for (int r = 0; r < n; ++r) {
    const double big = block.row(r).cwiseAbs().maxCoeff();
    if (big == 0.0) throw Error(ErrorCode::SingularMatrix, "empty row in the coupled block");
    d[r] = 1.0 / std::sqrt(big);
  }
  const Eigen::MatrixXcd scaled = d.asDiagonal() * block * d.asDiagonal();
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(scaled);
  if (!lu.isInvertible() || lu.rcond() < 1e-13) {
    throw Error(ErrorCode::SingularMatrix, "coupled (y, alpha, beta) block is singular");
  }
  const Eigen::MatrixXcd inv = d.asDiagonal() * lu.inverse() * d.asDiagonal();
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) chi(idx[r], idx[c]) = inv(r, c);
  }

  SusceptibilityMatrix out;
  out.omega = w;
  out.chi = chi;
  out.static_alpha_excluded = static_alpha;
  // A chi - 1 mixes metres and radians off the diagonal; judge it in the
  // same equilibrated units as the inverse, D (A chi - 1) D^-1.
  Eigen::Matrix<double, 5, 1> scale = Eigen::Matrix<double, 5, 1>::Ones();
  for (int k : {0, 2}) scale[k] = 1.0 / std::sqrt(std::abs(a(k, k)));
  for (int r = 0; r < n; ++r) scale[idx[r]] = d[r];
  Matrix5c prod = a * chi - Matrix5c::Identity();
  if (static_alpha) prod(3, 3) = 0.0;
  out.inverse_residual = (scale.asDiagonal() * prod * scale.cwiseInverse().asDiagonal()).cwiseAbs().maxCoeff();
  return out;
}

std::vector<Coord5> response(const ModeParams& p, const Coord5& force_psd, const std::vector<double>& omegas) {
  std::vector<Coord5> out;
  out.reserve(omegas.size());
  for (double w : omegas) {
    const Matrix5c chi = build_susceptibility(p, w).chi;
    Coord5 s{};
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c < 5; ++c) s[r] += std::norm(chi(r, c)) * force_psd[c];
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace levitrap
