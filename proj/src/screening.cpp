// Complete-shielding response of a punctured superconducting sheet.
//
// Above the sheet the total scalar potential is psi_s(r) + psi_s(r_mirror) + u(r),
// below it is -u(r_mirror), where u is the potential of a surface charge sigma
// (the normal field H_z crossing the hole) confined to the hole:
//
//     u(r) = 1/(2 pi) \int_hole sigma(p) / |r - p| dA.
//
// Continuity of the potential through the hole up to the constant jump C (the
// stream function of the hole) gives, on the hole,
//
//     u = C/2 - psi_s,        \int_hole sigma dA = 0   (zero fluxoid).
//
// On the unit disk the single-layer operator is diagonal in the basis
//     sigma_nm = rho^m P_n^{(m,-1/2)}(1 - 2 rho^2) / sqrt(1 - rho^2) e^{i m theta},
// mapping it to lambda_nm rho^m P_n^{(m,-1/2)}(1 - 2 rho^2) e^{i m theta} with
//     lambda_nm = Gamma(m+n+1/2) Gamma(n+1/2) / (2 Gamma(m+n+1) Gamma(n+1)).
// The zero-flux constraint removes exactly the (n, m) = (0, 0) mode, which
// fixes C.

#include <algorithm>
#include <cmath>

#include "levitrap/constants.hpp"
#include "levitrap/error.hpp"
#include "levitrap/magnetostatics.hpp"
#include "levitrap/quadrature.hpp"
#include "screening_grid.hpp"

namespace levitrap {

using constants::pi;

void ScGeometry::validate() const {
  if (!(hole_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "hole radius must be > 0");
  if (!(mesh_outer_cutoff >= 10.0)) {
    throw Error(ErrorCode::InvalidArgument, "mesh outer cutoff must be >= 10 hole radii");
  }
  if (mesh_node_count < 100) throw Error(ErrorCode::InvalidArgument, "mesh node count must be >= 100");
  if (!(grading_exponent >= 1.0)) throw Error(ErrorCode::InvalidArgument, "grading exponent must be >= 1");
}

int ScGeometry::radial_nodes() const {
  return std::max(8, static_cast<int>(std::lround(std::sqrt(mesh_node_count / 2.0))));
}

int ScGeometry::angular_nodes() const { return 2 * radial_nodes(); }

int ScreeningGrid::polynomial_count(int m) const {
  const int cap = (3 * n_radial) / 4;
  return std::clamp((2 * n_radial - m) / 3, 1, cap);
}

ScreeningGrid::ScreeningGrid(const ScGeometry& geom) : geometry(geom) {
  geometry.validate();
  const double a = geometry.hole_radius;
  n_radial = geometry.radial_nodes();
  n_angular = geometry.angular_nodes();
  n_harmonics = n_angular / 2 - 1;

  // rho = sin(t) absorbs the rim weight: rho drho / sqrt(1 - rho^2) = sin(t) dt.
  const quad::Rule rule = quad::gauss_legendre(n_radial, 0.0, pi / 2);
  rho.resize(n_radial);
  radial_weight.resize(n_radial);
  for (int q = 0; q < n_radial; ++q) {
    rho[q] = std::sin(rule.nodes[q]);
    radial_weight[q] = rule.weights[q] * std::sin(rule.nodes[q]);
  }
  cos_table.resize(n_harmonics + 1, n_angular);
  sin_table.resize(n_harmonics + 1, n_angular);
  for (int m = 0; m <= n_harmonics; ++m) {
    for (int j = 0; j < n_angular; ++j) {
      const double th = 2.0 * pi * j / n_angular;
      cos_table(m, j) = std::cos(m * th);
      sin_table(m, j) = std::sin(m * th);
    }
  }

  const Eigen::VectorXd sqrt_w =
      Eigen::Map<const Eigen::VectorXd>(radial_weight.data(), n_radial).cwiseSqrt();
  transfer.resize(n_harmonics + 1);
  fit.resize(n_harmonics + 1);
  for (int m = 0; m <= n_harmonics; ++m) {
    const int np = polynomial_count(m);
    Eigen::MatrixXd basis(n_radial, np);
    for (int q = 0; q < n_radial; ++q) {
      const double x = 1.0 - 2.0 * rho[q] * rho[q];
      const double rm = std::pow(rho[q], m);
      for (int n = 0; n < np; ++n) basis(q, n) = rm * quad::jacobi(n, m, -0.5, x);
    }
    Eigen::VectorXd scale(np);
    for (int n = 0; n < np; ++n) {
      scale[n] = std::sqrt((basis.col(n).array().square() * sqrt_w.array().square()).sum());
      if (scale[n] == 0.0) scale[n] = 1.0;
      basis.col(n) /= scale[n];
    }
    const Eigen::MatrixXd weighted = sqrt_w.asDiagonal() * basis;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(weighted);
    // Coefficients of the normalised basis from samples.
    const Eigen::MatrixXd project = cod.pseudoInverse() * sqrt_w.asDiagonal();
    Eigen::VectorXd inv_lambda(np);
    for (int n = 0; n < np; ++n) {
      const double log_lambda = std::lgamma(m + n + 0.5) + std::lgamma(n + 0.5) -
                                std::lgamma(m + n + 1.0) - std::lgamma(n + 1.0) - std::log(2.0);
      inv_lambda[n] = std::exp(-log_lambda);
    }
    if (m == 0) {
      inv_lambda[0] = 0.0;
      // raw coefficient of P_0 = 1 is the normalised one divided by its scale
      mean_row = project.row(0) / scale[0];
    }
    transfer[m] = basis * inv_lambda.asDiagonal() * project;
    fit[m] = basis * project;
  }

  // Equivalent charges sit on the quadrature nodes of the hole.
  const int count = n_radial * n_angular;
  nodes.resize(count);
  charge_weight.resize(count);
  for (int q = 0; q < n_radial; ++q) {
    for (int j = 0; j < n_angular; ++j) {
      const double th = 2.0 * pi * j / n_angular;
      nodes[q * n_angular + j] = Vec3(a * rho[q] * std::cos(th), a * rho[q] * std::sin(th), 0.0);
      charge_weight[q * n_angular + j] = 2.0 * pi * a * a * radial_weight[q] / n_angular;
    }
  }
  cell_size = a * std::max(pi / (2.0 * n_radial), 2.0 * pi / n_angular);

  // Annular sampling mesh on the sheet: cell midpoints, graded towards the rim.
  mesh_angular = n_angular;
  mesh_radial = std::max(4, geometry.mesh_node_count / mesh_angular);
  mesh_r.resize(mesh_radial);
  for (int i = 0; i < mesh_radial; ++i) {
    const double s = (i + 0.5) / mesh_radial;
    mesh_r[i] = a * (1.0 + (geometry.mesh_outer_cutoff - 1.0) * std::pow(s, geometry.grading_exponent));
  }
}

namespace {

Vec3 mirror(const Vec3& v) { return {v.x(), v.y(), -v.z()}; }

Vec3 source_h(const FieldSource& src, const Vec3& p) { return source_field(src, p) / constants::mu0; }

// Field of the mirror source that enforces B_z = 0 on a hole-free sheet.
Vec3 image_h(const FieldSource& src, const Vec3& p) { return mirror(source_h(src, mirror(p))); }

void check_source(const FieldSource& src) {
  std::visit(
      [](const auto& s) {
        s.validate();
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, DipoleSource>) {
          if (!(s.position.z() > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "dipole must lie strictly above the sheet");
          }
        }
      },
      src);
}

}  // namespace

ScreeningSolver::ScreeningSolver(const ScGeometry& geometry)
    : grid_(std::make_shared<const ScreeningGrid>(geometry)) {}

const ScGeometry& ScreeningSolver::geometry() const { return grid_->geometry; }

SheetCurrentSolution ScreeningSolver::solve(const FieldSource& source) const {
  check_source(source);
  const ScreeningGrid& g = *grid_;
  const double a = g.geometry.hole_radius;
  const int nr = g.n_radial;
  const int na = g.n_angular;
  const int nh = g.n_harmonics;

  // Right-hand side -psi_s / a sampled on the hole grid.
  Eigen::MatrixXd rhs(nr, na);
  for (int q = 0; q < nr; ++q) {
    for (int j = 0; j < na; ++j) {
      rhs(q, j) = -source_scalar_potential(source, g.nodes[q * na + j]) / a;
    }
  }
  if (!rhs.allFinite()) throw Error(ErrorCode::SolverSingular, "non-finite source potential on the hole");

  // Angular Fourier analysis: columns are harmonics.
  const Eigen::MatrixXd cos_coef = rhs * g.cos_table.transpose() * (2.0 / na);
  const Eigen::MatrixXd sin_coef = rhs * g.sin_table.transpose() * (2.0 / na);

  Eigen::MatrixXd sigma_c(nr, nh + 1);
  Eigen::MatrixXd sigma_s(nr, nh + 1);
  double misfit = 0.0;
  double norm = 0.0;
  const Eigen::ArrayXd w = Eigen::Map<const Eigen::ArrayXd>(g.radial_weight.data(), nr);
  for (int m = 0; m <= nh; ++m) {
    const double f = (m == 0) ? 0.5 : 1.0;
    const Eigen::VectorXd c = cos_coef.col(m) * f;
    const Eigen::VectorXd s = sin_coef.col(m) * f;
    sigma_c.col(m) = g.transfer[m] * c;
    sigma_s.col(m) = g.transfer[m] * s;
    const double weight = (m == 0) ? 1.0 : 0.5;
    misfit += weight * (w * (g.fit[m] * c - c).array().square()).sum();
    misfit += weight * (w * (g.fit[m] * s - s).array().square()).sum();
    norm += weight * (w * (c.array().square() + s.array().square())).sum();
  }
  // u = C/2 - psi_s with the (0,0) coefficient of u removed.
  const double rim = -2.0 * a * g.mean_row.dot(cos_coef.col(0) * 0.5);

  const Eigen::MatrixXd sigma = sigma_c * g.cos_table + sigma_s * g.sin_table;
  std::vector<double> charges(static_cast<std::size_t>(nr) * na);
  for (int q = 0; q < nr; ++q) {
    for (int j = 0; j < na; ++j) {
      const int k = q * na + j;
      charges[k] = sigma(q, j) * g.charge_weight[k] / (2.0 * pi);
    }
  }
  const double residual = norm > 0.0 ? std::sqrt(misfit / norm) : 0.0;
  return SheetCurrentSolution(grid_, source, std::move(charges), rim, residual);
}

SheetCurrentSolution::SheetCurrentSolution(std::shared_ptr<const ScreeningGrid> grid, FieldSource source,
                                           std::vector<double> charges, double rim_constant,
                                           double projection_residual)
    : grid_(std::move(grid)),
      source_(std::move(source)),
      charges_(std::move(charges)),
      rim_constant_(rim_constant),
      projection_residual_(projection_residual) {}

const ScGeometry& SheetCurrentSolution::geometry() const { return grid_->geometry; }

Vec3 SheetCurrentSolution::hole_h(const Vec3& point) const {
  Vec3 h = Vec3::Zero();
  const auto& nodes = grid_->nodes;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Vec3 d = point - nodes[k];
    const double r2 = d.squaredNorm();
    h += charges_[k] / (r2 * std::sqrt(r2)) * d;
  }
  return h;
}

double SheetCurrentSolution::hole_potential(const Vec3& point) const {
  double u = 0.0;
  const auto& nodes = grid_->nodes;
  for (std::size_t k = 0; k < nodes.size(); ++k) u += charges_[k] / (point - nodes[k]).norm();
  return u;
}

Vec3 SheetCurrentSolution::induced_field(const Vec3& point) const {
  Vec3 h;
  if (point.z() >= 0.0) {
    h = image_h(source_, point) + hole_h(point);
  } else {
    h = -mirror(hole_h(mirror(point))) - source_h(source_, point);
  }
  return constants::mu0 * h;
}

Vec3 SheetCurrentSolution::total_field(const Vec3& point) const {
  return source_field(source_, point) + induced_field(point);
}

double SheetCurrentSolution::stream_function(double x, double y) const {
  const double a = grid_->geometry.hole_radius;
  if (std::hypot(x, y) <= a) return rim_constant_;
  const Vec3 p(x, y, 0.0);
  return 2.0 * source_scalar_potential(source_, p) + 2.0 * hole_potential(p);
}

std::vector<MeshNode> SheetCurrentSolution::mesh() const {
  const ScreeningGrid& g = *grid_;
  std::vector<MeshNode> out;
  out.reserve(static_cast<std::size_t>(g.mesh_radial) * g.mesh_angular);
  for (int i = 0; i < g.mesh_radial; ++i) {
    for (int j = 0; j < g.mesh_angular; ++j) {
      const double th = 2.0 * pi * j / g.mesh_angular;
      const double r = g.mesh_r[i];
      out.push_back({r, th, stream_function(r * std::cos(th), r * std::sin(th))});
    }
  }
  return out;
}

double SheetCurrentSolution::hole_flux() const {
  double total = 0.0;
  for (double q : charges_) total += q;
  return constants::mu0 * 2.0 * pi * total;
}

double SheetCurrentSolution::hole_source_abs_flux() const {
  const ScreeningGrid& g = *grid_;
  const double a = g.geometry.hole_radius;
  double total = 0.0;
  for (int q = 0; q < g.n_radial; ++q) {
    // dA = a^2 rho drho dtheta = a^2 sin t cos t dt dtheta
    const double dr = g.radial_weight[q] * std::sqrt(1.0 - g.rho[q] * g.rho[q]);
    for (int j = 0; j < g.n_angular; ++j) {
      const double bz = source_field(source_, g.nodes[q * g.n_angular + j]).z();
      total += std::abs(bz) * a * a * dr * 2.0 * pi / g.n_angular;
    }
  }
  return total;
}

double SheetCurrentSolution::screening_residual() const {
  const ScreeningGrid& g = *grid_;
  double worst = 0.0;
  double scale = 0.0;
  for (int i = 0; i < g.mesh_radial; ++i) {
    for (int j = 0; j < g.mesh_angular; ++j) {
      const double th = 2.0 * pi * j / g.mesh_angular;
      const Vec3 p(g.mesh_r[i] * std::cos(th), g.mesh_r[i] * std::sin(th), 0.0);
      worst = std::max(worst, std::abs(total_field(p).z()));
      scale = std::max(scale, std::abs(source_field(source_, p).z()));
    }
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

bool SheetCurrentSolution::near_sheet(const Vec3& point) const {
  const double a = grid_->geometry.hole_radius;
  const double rho = std::hypot(point.x(), point.y());
  const double dist = std::hypot(std::max(0.0, rho - a), point.z());
  return dist < grid_->cell_size;
}

SheetCurrentSolution solve_sheet_current(const ScGeometry& geometry, const FieldSource& source) {
  return ScreeningSolver(geometry).solve(source);
}

Vec3 induced_field(const SheetCurrentSolution& solution, const Vec3& point) {
  return solution.induced_field(point);
}

NormalizedPotential::NormalizedPotential(int mesh_node_count)
    : solver_([&] {
        ScGeometry unit;
        unit.hole_radius = 1.0;
        unit.mesh_node_count = mesh_node_count;
        return unit;
      }()) {}

double NormalizedPotential::operator()(const Vec3& r_tilde, const Orientation& orientation) const {
  DipoleSource src;
  src.position = r_tilde;
  src.moment = 1.0;
  src.orientation = orientation;
  const SheetCurrentSolution sol = solver_.solve(src);
  const Vec3 h = sol.induced_field(r_tilde) / constants::mu0;
  // V_m / V0 with V0 = mu0 mu^2 / (4 pi a^3) and a = mu = 1.
  return -2.0 * pi * orientation.unit_vector().dot(h);
}

double normalized_axis_potential(double z_tilde, const Orientation& orientation, int mesh_node_count) {
  if (!(z_tilde > 0.0)) throw Error(ErrorCode::InvalidArgument, "z must be > 0");
  return NormalizedPotential(mesh_node_count)(Vec3(0.0, 0.0, z_tilde), orientation);
}

}  // namespace levitrap
