#include <array>
#include <cmath>

#include "levitrap/constants.hpp"
#include "levitrap/error.hpp"
#include "levitrap/magnetostatics.hpp"
#include "levitrap/quadrature.hpp"

namespace levitrap {

void RectLoop::validate() const {
  if (!(side > 0.0)) throw Error(ErrorCode::InvalidArgument, "loop side must be > 0");
  if (std::abs(normal.norm() - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "loop normal must be a unit vector");
}

namespace {

// In-plane axes (u, v) with u x v = normal.
std::pair<Vec3, Vec3> loop_axes(const Vec3& n) {
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitZ();
  Vec3 u = (helper - helper.dot(n) * n).normalized();
  Vec3 v = n.cross(u);
  return {u, v};
}

void check_clearance(const RectLoop& loop, const DipoleSource& src) {
  // The loop must not pass through the source point itself.
  const auto [u, v] = loop_axes(loop.normal);
  const Vec3 d = src.position - loop.center;
  const double h = loop.side / 2;
  if (std::abs(d.dot(loop.normal)) < 1e-12 * loop.side && std::abs(d.dot(u)) <= h && std::abs(d.dot(v)) <= h) {
    throw Error(ErrorCode::SingularPoint, "dipole lies on the loop surface");
  }
}

}  // namespace

double loop_flux(const RectLoop& loop, const DipoleSource& src, const SheetCurrentSolution* screening) {
  loop.validate();
  src.validate();
  check_clearance(loop, src);
  const auto [u, v] = loop_axes(loop.normal);
  const double h = loop.side / 2;
  auto bn = [&](double s, double t) {
    const Vec3 p = loop.center + s * u + t * v;
    Vec3 b = dipole_field(src, p);
    if (screening) b += screening->induced_field(p);
    return b.dot(loop.normal);
  };
  const double tol = screening ? 1e-7 : 1e-10;
  return quad::adaptive(
      [&](double s) { return quad::adaptive([&](double t) { return bn(s, t); }, -h, h, tol); }, -h, h, tol);
}

double loop_flux_line_integral(const RectLoop& loop, const DipoleSource& src) {
  loop.validate();
  src.validate();
  check_clearance(loop, src);
  const auto [u, v] = loop_axes(loop.normal);
  const double h = loop.side / 2;
  const Vec3 m = src.moment_vector();
  auto a_dot = [&](const Vec3& p, const Vec3& dir) {
    const Vec3 r = p - src.position;
    return constants::mu0 / (4.0 * constants::pi) * m.cross(r).dot(dir) / std::pow(r.norm(), 3);
  };
  // Counter-clockwise about the normal: corners (-,-) (+,-) (+,+) (-,+).
  const std::array<Vec3, 4> corner = {loop.center - h * u - h * v, loop.center + h * u - h * v,
                                      loop.center + h * u + h * v, loop.center - h * u + h * v};
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Vec3 p0 = corner[k];
    const Vec3 dir = (corner[(k + 1) % 4] - p0) / loop.side;
    total += quad::adaptive([&](double t) { return a_dot(p0 + t * dir, dir); }, 0.0, loop.side, 1e-12);
  }
  return total;
}

}  // namespace levitrap
