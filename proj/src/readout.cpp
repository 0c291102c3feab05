#include "levitrap/readout.hpp"

#include <cmath>
#include <optional>

#include "levitrap/constants.hpp"
#include "levitrap/error.hpp"

namespace levitrap {

namespace {

double loglog(double x, double x0, double x1, double y0, double y1) {
  const double t = std::log(x / x0) / std::log(x1 / x0);
  return std::exp(std::log(y0) + t * (std::log(y1) - std::log(y0)));
}

Eigen::Matrix<double, 4, 3> flux_matrix(const Axis3& eta) {
  Eigen::Matrix<double, 4, 3> g;
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i < 3; ++i) g(k, i) = loop_signs[k][i] * eta[i];
  }
  return g;
}

}  // namespace

ReadoutArray make_array(double side, double distance, double z0) {
  if (!(side > 0.0 && distance > 0.0)) throw Error(ErrorCode::InvalidArgument, "loop side and distance must be > 0");
  ReadoutArray arr;
  arr.side = side;
  arr.distance = distance;
  arr.z0 = z0;
  const double h = side / 2;
  const std::array<Vec3, 4> centres = {Vec3(h, -distance, z0 + h), Vec3(h, -distance, z0 - h),
                                       Vec3(-h, -distance, z0 + h), Vec3(-h, -distance, z0 - h)};
  for (int k = 0; k < 4; ++k) arr.loops[k] = RectLoop{centres[k], side, Vec3::UnitY()};
  return arr;
}

ReadoutArray design_array(double radius, double z0) {
  const double r_um = radius * 1e6;
  const auto& t = readout_design_table;
  if (!(r_um >= t.front().radius_um * (1 - 1e-9) && r_um <= t.back().radius_um * (1 + 1e-9))) {
    throw Error(ErrorCode::OutOfRange, "magnet radius outside the readout design table");
  }
  std::size_t i = 0;
  while (i + 2 < t.size() && r_um > t[i + 1].radius_um) ++i;
  const auto& lo = t[i];
  const auto& hi = t[i + 1];
  auto interp = [&](double ReadoutDesignRow::*field) {
    return loglog(r_um, lo.radius_um, hi.radius_um, lo.*field, hi.*field);
  };
  ReadoutArray arr = make_array(interp(&ReadoutDesignRow::side_um) * 1e-6,
                                interp(&ReadoutDesignRow::distance_um) * 1e-6, z0);
  const double eta = interp(&ReadoutDesignRow::eta);
  arr.eta = {eta, eta, eta};
  return arr;
}

Couplings coupling_factors(const ReadoutArray& array, const MagnetSpec& magnet, const Vec3& r0, double step,
                           const ScGeometry* sc) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be > 0");
  for (const auto& loop : array.loops) {
    // The sphere must stay clear of the loop plane.
    if (std::abs(r0.y() - loop.center.y()) <= magnet.radius) {
      throw Error(ErrorCode::InvalidArgument, "loop plane intersects the magnet");
    }
  }
  std::optional<ScreeningSolver> solver;
  if (sc) solver.emplace(*sc);

  auto fluxes = [&](const Vec3& r) {
    DipoleSource src;
    src.position = r;
    src.moment = magnet.moment();
    std::optional<SheetCurrentSolution> sol;
    if (solver) sol.emplace(solver->solve(src));
    std::array<double, 4> out{};
    for (int k = 0; k < 4; ++k) {
      out[k] = loop_flux(array.loops[k], src, sol ? &*sol : nullptr) / constants::flux_quantum;
    }
    return out;
  };

  Couplings c;
  for (int i = 0; i < 3; ++i) {
    auto diff = [&](double h) {
      Vec3 d = Vec3::Zero();
      d[i] = h;
      const auto plus = fluxes(r0 + d);
      const auto minus = fluxes(r0 - d);
      std::array<double, 4> out{};
      for (int k = 0; k < 4; ++k) out[k] = (plus[k] - minus[k]) / (2 * h);
      return out;
    };
    const auto big = diff(step);
    const auto small = diff(step / 2);
    for (int k = 0; k < 4; ++k) {
      c.per_loop[k][i] = (4 * small[k] - big[k]) / 3;
      c.eta[i] += loop_signs[k][i] * c.per_loop[k][i];
    }
  }
  return c;
}

std::array<double, 4> encode_fluxes(const Vec3& r, const Axis3& eta) {
  const Eigen::Vector4d b = flux_matrix(eta) * r;
  return {b[0], b[1], b[2], b[3]};
}

FluxInversion invert_fluxes(const std::array<double, 4>& dphi, const Axis3& eta) {
  for (double e : eta) {
    if (e == 0.0 || !std::isfinite(e)) throw Error(ErrorCode::SingularMatrix, "coupling factor is zero");
  }
  const Eigen::Matrix<double, 4, 3> g = flux_matrix(eta);
  const Eigen::Vector4d b(dphi[0], dphi[1], dphi[2], dphi[3]);
  Eigen::JacobiSVD<Eigen::Matrix<double, 4, 3>> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  FluxInversion out;
  out.position = svd.solve(b);
  const double bn = b.norm();
  out.residual = bn > 0.0 ? (g * out.position - b).norm() / bn : 0.0;
  out.amplification = 1.0 / svd.singularValues().minCoeff();
  return out;
}

}  // namespace levitrap
