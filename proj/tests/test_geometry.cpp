#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mfglab/errors.hpp"
#include "mfglab/geometry.hpp"

using namespace mfglab;

TEST_CASE("plain 33x33 grid counts and spacing") {
  const Grid g = build_grid({1.0, 1.0}, {33, 33}, {});
  CHECK(g.nx == 33);
  CHECK(g.hx == doctest::Approx(1.0 / 32).epsilon(1e-15));
  CHECK(g.n_active == 33 * 33);
  CHECK(g.n_interior == 31 * 31);
  CHECK(g.cls(0, 0) == NodeClass::OuterBoundary);
  CHECK(g.cls(16, 16) == NodeClass::Interior);
}

TEST_CASE("centered rectangle obstacle excludes a 7x7 block") {
  ObstacleSpec obs;
  obs.shape = ObstacleShape::Rectangle;
  obs.center = {0.5, 0.5};
  obs.half_extents = {0.125, 0.125};
  const Grid g = build_grid({1.0, 1.0}, {33, 33}, obs);
  // Containment is strict, so only nodes with |x-0.5| < 0.125 drop out:
  // x = 13/32 .. 19/32, i.e. a 7x7 block of 49 nodes.
  CHECK(g.n_active == 33 * 33 - 49);
  int inner = 0, outer = 0, interior = 0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      switch (g.cls(i, j)) {
        case NodeClass::InnerBoundary: ++inner; break;
        case NodeClass::OuterBoundary: ++outer; break;
        case NodeClass::Interior: ++interior; break;
        default: break;
      }
    }
  }
  // The inner boundary is the 4 exposed sides of the surrounding 9x9 ring
  // (corners touch only diagonally): 4 * 7 nodes.
  CHECK(inner == 28);
  CHECK(outer == 4 * 32);
  CHECK(interior == g.n_interior);
  CHECK(inner + outer + interior == g.n_active);
}

TEST_CASE("centered disk obstacle excludes the strict interior of the circle") {
  ObstacleSpec obs;
  obs.shape = ObstacleShape::Disk;
  obs.center = {0.5, 0.5};
  obs.radius = 0.125;  // 4 cells at h = 1/32
  const Grid g = build_grid({1.0, 1.0}, {33, 33}, obs);
  // Lattice offsets with di^2 + dj^2 < 16: 7 + 7 + 7 + 7 + 7 + 5 + 5 = 45.
  CHECK(g.n_active == 33 * 33 - 45);
}

TEST_CASE("obstacle touching the outer layer is rejected") {
  ObstacleSpec obs;
  obs.shape = ObstacleShape::Rectangle;
  obs.center = {0.05, 0.5};
  obs.half_extents = {0.125, 0.125};
  CHECK_THROWS_AS(build_grid({1.0, 1.0}, {33, 33}, obs), GeometryError);
}

TEST_CASE("boundary patch quadrature covers the requested edge") {
  const Grid g = build_grid({1.0, 1.0}, {33, 33}, {});
  const BoundaryPatch full = make_patch(g, {{Edge::Right, 0.0, 1.0}});
  CHECK(!full.empty());
  CHECK(full.total_length == doctest::Approx(1.0).epsilon(1e-12));
  double sum = 0.0;
  for (const auto& f : full.faces) {
    CHECK(f.edge == Edge::Right);
    CHECK(f.i == g.nx - 1);
    sum += f.length;
  }
  CHECK(sum == doctest::Approx(full.total_length).epsilon(1e-12));

  // End nodes carry half-cell quadrature shares, so the covered length can
  // exceed the nominal fraction by up to one cell.
  const BoundaryPatch half = make_patch(g, {{Edge::Top, 0.0, 0.5}});
  CHECK(std::abs(half.total_length - 0.5) <= g.hx);
  CHECK(half.faces.size() < full.faces.size());
}

TEST_CASE("candidate family expands every center") {
  CandidateFamily fam;
  fam.centers = {{0.25, 0.25}, {0.5, 0.5}, {0.75, 0.75}};
  const auto cands = candidate_obstacles({1.0, 1.0}, {33, 33}, fam);
  CHECK(cands.size() == 3);
  for (const auto& c : cands) CHECK(c.shape == ObstacleShape::Rectangle);
}

TEST_CASE("resolution and domain sanity checks") {
  CHECK_THROWS_AS(build_grid({1.0, 1.0}, {2, 2}, {}), GeometryError);
  CHECK_THROWS_AS(build_grid({-1.0, 1.0}, {33, 33}, {}), GeometryError);
}
