#pragma once

#include <array>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "levitrap/magnetostatics.hpp"

namespace levitrap {

/// Spherical permanent magnet; defaults are Nd2Fe14B.
struct MagnetSpec {
  double radius = 100e-9;                 // m
  double magnetization_density = 1.07e6;  // A/m
  double mass_density = 7300.0;           // kg/m^3
  double susceptibility = 0.05;           // remanent chi_m
  double conductivity = 6.67e5;           // S/m

  static constexpr double single_domain_radius = 110e-9;  // m, metadata only

  double volume() const;
  double moment() const;   // A m^2
  double mass() const;     // kg
  double inertia() const;  // kg m^2
  void validate() const;
};

/// How the trap depth is measured: lowest mountain pass out of the trap
/// (searched on the x-z and y-z planes), or the lowest of the axis cuts at
/// fixed height.
enum class DepthMethod { EscapePath, AxisCuts };

struct TrapConfig {
  MagnetSpec magnet;
  ScGeometry sc;  // sc.hole_radius is overwritten by find_equilibrium
  double gravity = 9.80665;
  double target_ratio = 1.8;
  double fd_step = 1e-3;  // finite-difference step in units of a (and radians for beta)
  DepthMethod depth_method = DepthMethod::EscapePath;

  void validate() const;
};

struct Equilibrium {
  double hole_radius = 0.0;
  double z0 = 0.0;
  int iterations = 0;
};

struct TrapCharacterization {
  double radius = 0.0;
  double hole_radius = 0.0;
  double z0 = 0.0;
  double omega_x = 0.0;
  double omega_y = 0.0;
  double omega_z = 0.0;
  double omega_beta = 0.0;
  double kappa = 0.0;  // J / (rad m)
  double trap_depth_K = 0.0;
  double V0 = 0.0;
  /// Hessian of V/V0 in (x/a, y/a, z/a, beta) at the trap centre.
  Eigen::Matrix4d normalized_hessian = Eigen::Matrix4d::Zero();
  /// Barriers (in V0) along +x, -x, +y, -y, +z, -z at fixed height.
  std::array<double, 6> barriers{};
  /// Mountain-pass barriers (in V0): lateral via x-z, lateral via y-z, down through the hole.
  std::array<double, 3> escape_barriers{};
};

/// Potential energy of the magnet above a sheet with a fixed hole radius
/// (cfg.sc.hole_radius), optionally with an extra external energy term.
class TrapModel {
 public:
  using ExtraEnergy = std::function<double(const Vec3& r, double beta)>;  // joule

  explicit TrapModel(const TrapConfig& cfg, ExtraEnergy extra = {});

  double hole_radius() const { return a_; }
  double V0() const { return v0_; }
  const TrapConfig& config() const { return cfg_; }

  /// Total potential in joule at r (m) and tilt beta (rad).
  double potential(const Vec3& r, double beta) const;
  /// Total potential divided by V0, with r_tilde = r / a.
  double normalized(const Vec3& r_tilde, double beta) const;

  /// On-axis stable equilibrium height in metres; searched from `z_guess`.
  double equilibrium_height(double z_guess) const;
  /// Hessian, frequencies and coupling at (0, 0, z0); the depth search is
  /// skipped when `with_depth` is false.
  TrapCharacterization characterize(double z0, bool with_depth = true) const;

 private:
  TrapConfig cfg_;
  ExtraEnergy extra_;
  double a_ = 0.0;
  double v0_ = 0.0;
  double gravity_tilde_ = 0.0;  // M g a / V0
  std::shared_ptr<const NormalizedPotential> unit_;
};

/// Shared unit-hole potential for a given node budget (thread-safe cache).
std::shared_ptr<const NormalizedPotential> unit_potential(int mesh_node_count);

double total_potential(const TrapConfig& cfg, const Vec3& r, double beta);

/// Chooses a so that the equilibrium sits at z0 = target_ratio * a.
Equilibrium find_equilibrium(const TrapConfig& cfg);

TrapCharacterization characterize_trap(const TrapConfig& cfg);

struct SweepRow {
  double radius = 0.0;
  std::optional<TrapCharacterization> trap;
  std::string error;
};

struct ScalingFit {
  double z0 = std::numeric_limits<double>::quiet_NaN();
  double omega_x = std::numeric_limits<double>::quiet_NaN();
  double omega_y = std::numeric_limits<double>::quiet_NaN();
  double omega_z = std::numeric_limits<double>::quiet_NaN();
  double omega_beta = std::numeric_limits<double>::quiet_NaN();
  double trap_depth = std::numeric_limits<double>::quiet_NaN();
};

/// Characterises each radius independently; failures are recorded per row.
std::vector<SweepRow> sweep_radius(const std::vector<double>& radii, const TrapConfig& tmpl, int threads = 0);

/// Least-squares log-log slopes over the successful rows.
ScalingFit scaling_exponents(const std::vector<SweepRow>& rows);

/// Slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// max |B| on the sheet surface over the sampling mesh, over mu0 Hc1 of Nb.
/// Uses cfg.sc.hole_radius and the trap height z0.
double surface_field_margin(const TrapConfig& cfg, double z0);

}  // namespace levitrap
