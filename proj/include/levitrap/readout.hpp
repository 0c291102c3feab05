#pragma once

#include <array>

#include "levitrap/magnetostatics.hpp"
#include "levitrap/trap.hpp"

namespace levitrap {

using Axis3 = std::array<double, 3>;

/// One row of the published readout design table (micrometres, 1/m).
struct ReadoutDesignRow {
  double radius_um;
  double distance_um;
  double side_um;
  double eta;
};

inline constexpr std::array<ReadoutDesignRow, 6> readout_design_table = {{
    {0.1, 1.0, 0.85, 7.3e5},
    {1.0, 4.0, 3.5, 4.6e7},
    {10.0, 20.0, 17.0, 1.8e9},
    {1e2, 110.0, 95.0, 6.0e10},
    {1e3, 1100.0, 950.0, 6.0e11},
    {1e4, 11000.0, 9500.0, 6.0e12},
}};

/// Per-loop signs of (x, y, z) in the flux equations; loops ordered
/// (+x, +z), (+x, -z), (-x, +z), (-x, -z) relative to the trap centre.
inline constexpr std::array<std::array<int, 3>, 4> loop_signs = {{
    {+1, -1, +1},
    {+1, -1, -1},
    {-1, -1, +1},
    {-1, -1, -1},
}};

/// Four coplanar square loops in the plane y = -distance.
struct ReadoutArray {
  std::array<RectLoop, 4> loops;
  double side = 0.0;      // m
  double distance = 0.0;  // m
  double z0 = 0.0;        // m, trap height the array is centred on
  Axis3 eta{};            // four-loop aggregate couplings (1/m)
};

/// Builds the array for magnet radius R by log-log interpolation of the
/// design table; eta is the interpolated tabulated aggregate.
ReadoutArray design_array(double radius, double z0);

/// Places loops for an explicit side and distance (eta left at zero).
ReadoutArray make_array(double side, double distance, double z0);

struct Couplings {
  Axis3 eta{};                               // aggregate, sum_k sign_k dPhi_k / Phi0
  std::array<Axis3, 4> per_loop{};           // dPhi_k/dx_i / Phi0 (signed)
};

/// eta_i = Phi0^-1 dPhi/dx_i by Richardson central differences with step
/// `step` (m). With `sc` the sheet response is included (re-solved per
/// displaced position with that geometry).
Couplings coupling_factors(const ReadoutArray& array, const MagnetSpec& magnet, const Vec3& r0, double step,
                           const ScGeometry* sc = nullptr);

/// Linear flux model: dPhi_k / Phi0 for displacement r.
std::array<double, 4> encode_fluxes(const Vec3& r, const Axis3& eta);

struct FluxInversion {
  Vec3 position = Vec3::Zero();
  double residual = 0.0;  // ||G r - b|| / ||b||
  double amplification = 0.0;  // ||G^+||_2, bounds |dr| / |db|
};

/// Least-squares position from four flux changes (units of Phi0).
FluxInversion invert_fluxes(const std::array<double, 4>& dphi, const Axis3& eta);

}  // namespace levitrap
