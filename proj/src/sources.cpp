#include <cmath>

#include "levitrap/constants.hpp"
#include "levitrap/error.hpp"
#include "levitrap/magnetostatics.hpp"

namespace levitrap {

using constants::pi;

Vec3 Orientation::unit_vector() const {
  return {std::cos(alpha) * std::cos(beta), std::sin(alpha) * std::cos(beta), std::sin(beta)};
}

Vec3 DipoleSource::moment_vector() const { return moment * orientation.unit_vector(); }

void DipoleSource::validate() const {
  if (!(moment >= 0.0)) throw Error(ErrorCode::InvalidArgument, "dipole moment must be >= 0");
  if (std::abs(orientation.beta) > pi / 2 + 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "beta must lie in [-pi/2, pi/2]");
  }
}

void WireSource::validate() const {
  if (!(height > 0.0)) throw Error(ErrorCode::InvalidArgument, "wire height must be > 0");
}

namespace {

Vec3 dipole_h(const Vec3& m, const Vec3& r) {
  const double d2 = r.squaredNorm();
  const double d = std::sqrt(d2);
  return (3.0 * m.dot(r) / d2 * r - m) / (4.0 * pi * d2 * d);
}

}  // namespace

Vec3 dipole_field(const DipoleSource& src, const Vec3& point) {
  const Vec3 r = point - src.position;
  if (r.norm() == 0.0) throw Error(ErrorCode::SingularPoint, "field requested at the dipole");
  return constants::mu0 * dipole_h(src.moment_vector(), r);
}

Vec3 wire_field(const WireSource& wire, const Vec3& point) {
  const double y = point.y();
  const double dz = point.z() - wire.height;
  const double d2 = y * y + dz * dz;
  if (d2 == 0.0) throw Error(ErrorCode::SingularPoint, "field requested on the wire");
  // Right-hand rule about -x: B ~ (0, dz, -y) / d^2.
  return constants::mu0 * wire.current / (2.0 * pi * d2) * Vec3(0.0, dz, -y);
}

Vec3 source_field(const FieldSource& src, const Vec3& point) {
  return std::visit(
      [&](const auto& s) -> Vec3 {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, DipoleSource>) {
          return dipole_field(s, point);
        } else {
          return wire_field(s, point);
        }
      },
      src);
}

double source_scalar_potential(const FieldSource& src, const Vec3& point) {
  return std::visit(
      [&](const auto& s) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, DipoleSource>) {
          const Vec3 r = point - s.position;
          const double d = r.norm();
          if (d == 0.0) throw Error(ErrorCode::SingularPoint, "potential requested at the dipole");
          return s.moment_vector().dot(r) / (4.0 * pi * d * d * d);
        } else {
          return s.current / (2.0 * pi) * std::atan2(point.z() - s.height, point.y());
        }
      },
      src);
}

}  // namespace levitrap
