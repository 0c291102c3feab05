#pragma once

#include <memory>
#include <numbers>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace levitrap {

using Vec3 = Eigen::Vector3d;

/// Orientation of a magnetic moment: mu_hat = (cos a cos b, sin a cos b, sin b).
struct Orientation {
  double alpha = std::numbers::pi / 2;
  double beta = 0.0;

  Vec3 unit_vector() const;
};

/// Point dipole with moment magnitude in A m^2.
struct DipoleSource {
  Vec3 position = Vec3::Zero();
  double moment = 0.0;
  Orientation orientation;

  Vec3 moment_vector() const;
  void validate() const;
};

/// Infinite straight wire parallel to the x-axis through (0, 0, height).
/// A positive current flows along -x.
struct WireSource {
  double current = 0.0;
  double height = 0.0;

  void validate() const;
};

using FieldSource = std::variant<DipoleSource, WireSource>;

/// Free-space flux density of a point dipole, in tesla.
Vec3 dipole_field(const DipoleSource& src, const Vec3& point);

/// Free-space flux density of the wire, in tesla.
Vec3 wire_field(const WireSource& wire, const Vec3& point);

Vec3 source_field(const FieldSource& src, const Vec3& point);

/// Magnetic scalar potential (ampere) with H = -grad(psi). For the wire the
/// branch cut runs from the wire towards -y at the wire height, so the value
/// is continuous over the half space below the wire.
double source_scalar_potential(const FieldSource& src, const Vec3& point);

/// Superconducting sheet in the plane z = 0 with a circular hole of radius
/// `hole_radius` centred on the origin. The sheet is treated in the complete
/// shielding limit (Pearl length much smaller than the hole).
struct ScGeometry {
  double hole_radius = 1.0;
  double film_thickness = 0.0;  // informational
  double pearl_length = 0.0;    // informational; the solver takes Lambda/a -> 0
  /// Outer radius, in units of the hole radius, of the annular mesh on which
  /// the stream function and surface fields are sampled.
  double mesh_outer_cutoff = 20.0;
  /// Node budget shared by the hole quadrature grid and the annular mesh.
  int mesh_node_count = 4608;
  /// Radial grading of the annular mesh; > 1 clusters nodes at the rim.
  double grading_exponent = 2.0;

  void validate() const;
  int radial_nodes() const;
  int angular_nodes() const;
};

struct MeshNode {
  double r = 0.0;
  double theta = 0.0;
  double stream = 0.0;  // stream function g (A)
};

class ScreeningGrid;

/// Induced response of the sheet to one source.
///
/// The sheet is infinite. Instead of the sheet current itself, the unknown is
/// the normal field crossing the hole: outside the sheet the field above is
/// source + mirror image + the field of an equivalent surface charge spread
/// over the hole, and the field below is the reflected hole contribution.
/// The stream function g follows as the jump of the scalar potential across
/// the sheet; it equals `rim_constant()` everywhere inside the hole.
class SheetCurrentSolution {
 public:
  SheetCurrentSolution(std::shared_ptr<const ScreeningGrid> grid, FieldSource source,
                       std::vector<double> charges, double rim_constant,
                       double projection_residual);

  const ScGeometry& geometry() const;
  const FieldSource& source() const { return source_; }

  /// Stream function inside the hole (A).
  double rim_constant() const { return rim_constant_; }

  /// Field of the sheet currents alone (tesla). Points on z = 0 are
  /// evaluated on the upper face.
  Vec3 induced_field(const Vec3& point) const;

  /// Source plus induced field (tesla).
  Vec3 total_field(const Vec3& point) const;

  /// Stream function g at an in-plane point (A). K = curl(g z_hat).
  double stream_function(double x, double y) const;

  /// Annular sampling mesh between the rim and the outer cutoff, with g.
  std::vector<MeshNode> mesh() const;

  /// Net normal flux through the hole (Wb).
  double hole_flux() const;
  /// Integral of |B_z| of the bare source over the hole (Wb).
  double hole_source_abs_flux() const;

  /// max |B_z,total| / max |B_z,source| over the annular mesh nodes.
  double screening_residual() const;

  /// Relative residual of the scalar potential continuity condition in the
  /// hole as reproduced by the truncated spectral expansion.
  double projection_residual() const { return projection_residual_; }

  /// True when the point lies within one hole-grid cell of the sheet plane.
  bool near_sheet(const Vec3& point) const;

  /// Equivalent hole charges (A m) and their positions; used by tests.
  const std::vector<double>& charges() const { return charges_; }
  const ScreeningGrid& grid() const { return *grid_; }

 private:
  Vec3 hole_h(const Vec3& point) const;
  double hole_potential(const Vec3& point) const;

  std::shared_ptr<const ScreeningGrid> grid_;
  FieldSource source_;
  std::vector<double> charges_;
  double rim_constant_ = 0.0;
  double projection_residual_ = 0.0;
};

/// Reusable solver for one sheet geometry. Construction precomputes the
/// per-harmonic projection operators; `solve` is const and reentrant.
class ScreeningSolver {
 public:
  explicit ScreeningSolver(const ScGeometry& geometry);

  SheetCurrentSolution solve(const FieldSource& source) const;
  const ScGeometry& geometry() const;

 private:
  std::shared_ptr<const ScreeningGrid> grid_;
};

SheetCurrentSolution solve_sheet_current(const ScGeometry& geometry, const FieldSource& source);

Vec3 induced_field(const SheetCurrentSolution& solution, const Vec3& point);

/// Magnetic potential V_m = -mu . B_ind / 2 normalised by V0 = mu0 mu^2 / (4 pi a^3),
/// for a unit hole and a dipole at r_tilde = r / a.
class NormalizedPotential {
 public:
  explicit NormalizedPotential(int mesh_node_count = 4608);

  double operator()(const Vec3& r_tilde, const Orientation& orientation) const;
  const ScreeningSolver& solver() const { return solver_; }

 private:
  ScreeningSolver solver_;
};

double normalized_axis_potential(double z_tilde, const Orientation& orientation,
                                 int mesh_node_count = 4608);

/// Square loop of side `side` centred at `center`; `normal` sets the flux sign.
struct RectLoop {
  Vec3 center = Vec3::Zero();
  double side = 0.0;
  Vec3 normal = Vec3::UnitY();

  void validate() const;
};

/// Flux of the dipole field through the loop (Wb) by adaptive quadrature. With
/// `screening` the induced sheet field of that solution is included; the
/// solution must have been computed for `src`.
double loop_flux(const RectLoop& loop, const DipoleSource& src,
                 const SheetCurrentSolution* screening = nullptr);

/// Same flux from the line integral of the dipole vector potential around the
/// loop boundary. Free-space only; used as an independent check.
double loop_flux_line_integral(const RectLoop& loop, const DipoleSource& src);

}  // namespace levitrap
