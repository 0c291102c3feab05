#pragma once

#include <vector>

#include <Eigen/Dense>

#include "levitrap/magnetostatics.hpp"

namespace levitrap {

// Precomputed discretisation of the hole problem for one geometry.
class ScreeningGrid {
 public:
  explicit ScreeningGrid(const ScGeometry& geometry);

  int polynomial_count(int m) const;

  ScGeometry geometry;
  int n_radial = 0;
  int n_angular = 0;
  int n_harmonics = 0;

  std::vector<double> rho;            // unit-disk radii of the radial nodes
  std::vector<double> radial_weight;  // includes the 1/sqrt(1 - rho^2) rim weight
  Eigen::MatrixXd cos_table;          // (harmonic, angular node)
  Eigen::MatrixXd sin_table;

  // Per harmonic: samples of -psi_s/a -> samples of sqrt(1 - rho^2) sigma.
  std::vector<Eigen::MatrixXd> transfer;
  // Per harmonic: samples -> their truncated spectral reconstruction.
  std::vector<Eigen::MatrixXd> fit;
  Eigen::RowVectorXd mean_row;

  std::vector<Vec3> nodes;  // physical positions, radial-major
  std::vector<double> charge_weight;
  double cell_size = 0.0;

  int mesh_radial = 0;
  int mesh_angular = 0;
  std::vector<double> mesh_r;
};

}  // namespace levitrap
