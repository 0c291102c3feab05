#include <doctest.h>

#include "approx.hpp"

#include <cmath>

#include "levitrap/error.hpp"
#include "levitrap/readout.hpp"

using namespace levitrap;

TEST_CASE("design table rows are reproduced exactly") {
  struct Row {
    double radius, distance, side, eta;
  };
  for (const Row& r : {Row{0.1e-6, 1e-6, 0.85e-6, 7.3e5}, Row{10e-6, 20e-6, 17e-6, 1.8e9},
                       Row{1e-2, 11000e-6, 9500e-6, 6.0e12}}) {
    const ReadoutArray a = design_array(r.radius, 0.0);
    CHECK(a.distance == rel(r.distance).epsilon(1e-12));
    CHECK(a.side == rel(r.side).epsilon(1e-12));
    CHECK(a.eta[0] == rel(r.eta).epsilon(1e-12));
  }
  CHECK_THROWS_AS(design_array(0.05e-6, 0.0), Error);
  CHECK_THROWS_AS(design_array(2e-2, 0.0), Error);
}

TEST_CASE("loop placement") {
  const ReadoutArray a = make_array(2e-6, 3e-6, 5e-6);
  for (int k = 0; k < 4; ++k) {
    CHECK(a.loops[k].center.y() == -3e-6);
    CHECK(a.loops[k].center.x() * loop_signs[k][0] > 0);
    CHECK((a.loops[k].center.z() - 5e-6) * loop_signs[k][2] > 0);
  }
}

TEST_CASE("free-space couplings follow the sign pattern and the table") {
  MagnetSpec m;
  for (double radius : {0.1e-6, 10e-6, 1e-3}) {
    m.radius = radius;
    const ReadoutArray a = design_array(radius, 0.0);
    const Couplings c = coupling_factors(a, m, Vec3::Zero(), 1e-3 * a.distance);
    for (int k = 0; k < 4; ++k) {
      for (int i = 0; i < 3; ++i) CHECK(c.per_loop[k][i] * loop_signs[k][i] > 0.0);
    }
    for (int i = 0; i < 3; ++i) {
      CHECK(c.eta[i] / a.eta[i] > 0.5);
      CHECK(c.eta[i] / a.eta[i] < 2.0);
    }
  }
}

TEST_CASE("couplings are linear in the moment") {
  MagnetSpec m;
  const ReadoutArray a = design_array(m.radius, 0.0);
  const Couplings one = coupling_factors(a, m, Vec3::Zero(), 1e-3 * a.distance);
  m.magnetization_density *= 3;
  const Couplings three = coupling_factors(a, m, Vec3::Zero(), 1e-3 * a.distance);
  for (int i = 0; i < 3; ++i) CHECK(three.eta[i] == rel(3 * one.eta[i]).epsilon(1e-8));
}

TEST_CASE("flux inversion") {
  const Axis3 eta = {7.3e5, 6.9e5, 7.6e5};

  SUBCASE("round trip") {
    for (const Vec3& r : {Vec3(1e-9, -2e-9, 3e-9), Vec3(-4e-12, 0, 1e-12)}) {
      const FluxInversion inv = invert_fluxes(encode_fluxes(r, eta), eta);
      CHECK((inv.position - r).norm() <= 1e-12 * r.norm());
      CHECK(inv.residual < 1e-12);
    }
  }
  SUBCASE("equal fluxes mean a pure y shift") {
    const double d = 0.37;
    const FluxInversion inv = invert_fluxes({d, d, d, d}, eta);
    CHECK(std::abs(inv.position.x()) < 1e-20);
    CHECK(std::abs(inv.position.z()) < 1e-20);
    CHECK(inv.position.y() == rel(-d / eta[1]));
  }
  SUBCASE("perturbations stay within the pseudoinverse bound") {
    const Vec3 r(1e-9, 2e-9, -1e-9);
    auto b = encode_fluxes(r, eta);
    const double eps = 1e-4;
    b[2] += eps;
    const FluxInversion inv = invert_fluxes(b, eta);
    CHECK((inv.position - r).norm() <= inv.amplification * eps * (1 + 1e-12));
    CHECK((inv.position - r).norm() > 0.0);
  }
  SUBCASE("zero coupling is rejected") {
    CHECK_THROWS_AS(invert_fluxes({1, 1, 1, 1}, {0.0, 1.0, 1.0}), Error);
  }
}
