#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mfglab/eigenpairs.hpp"
#include "mfglab/parabolic.hpp"

using namespace mfglab;

namespace {
constexpr double kNu = 0.2;
}

TEST_CASE("implicit Euler damps an eigenmode by exactly (1 + dt mu)^-k") {
  const Grid g = build_grid({1.0, 1.0}, {17, 17}, {});
  const TimeGrid tg{1.0, 32};
  const auto pairs = eigenpairs(g, Bc::DD, 1, kNu);
  const EigenPair& p = pairs.front();
  const SpaceTimeField sol = solve_heat_forward(g, tg, kNu, p.y, nullptr, Bc::DD);
  for (int k = 0; k <= tg.nt; ++k) {
    const double amp = std::pow(1.0 + tg.dt() * p.mu, -k);
    const double gap = (sol.values.col(k) - amp * p.y.values).cwiseAbs().maxCoeff();
    CHECK(gap <= 1e-10);
  }
}

TEST_CASE("forward solve preserves nonnegativity") {
  ObstacleSpec obs;
  obs.shape = ObstacleShape::Rectangle;
  obs.center = {0.5, 0.5};
  obs.half_extents = {0.125, 0.125};
  const Grid g = build_grid({1.0, 1.0}, {25, 25}, obs);
  const TimeGrid tg{1.0, 16};
  Field init = make_field(g, [](double x, double y) {
    return 0.5 + 0.5 * std::sin(7 * x) * std::cos(5 * y);
  });
  for (Bc bc : {Bc::DD, Bc::DN}) {
    const SpaceTimeField sol = solve_heat_forward(g, tg, kNu, init, nullptr, bc);
    CHECK(sol.min_value() >= -1e-12);
  }
}

TEST_CASE("constant Dirichlet data has the constant as steady state") {
  ObstacleSpec obs;
  obs.shape = ObstacleShape::Disk;
  obs.center = {0.5, 0.5};
  obs.radius = 0.15;
  const Grid g = build_grid({1.0, 1.0}, {25, 25}, obs);
  const TimeGrid tg{1.0, 16};
  const double g0 = 1.5;

  // DD with g0 on both boundary components: u == g0 solves the equation.
  const SpaceTimeField dd =
      solve_heat_forward(g, tg, kNu, Field(g, g0), nullptr, Bc::DD, {g0, g0, 0.0});
  CHECK((dd.values.array() - g0).abs().maxCoeff() <= 1e-11);

  // DN with g0 on the inner boundary and zero outer flux: same steady state.
  const SpaceTimeField dn =
      solve_heat_forward(g, tg, kNu, Field(g, g0), nullptr, Bc::DN, {g0, 0.0, 0.0});
  CHECK((dn.values.array() - g0).abs().maxCoeff() <= 1e-11);
}

TEST_CASE("backward solve is the time reversal of the forward solve") {
  const Grid g = build_grid({1.0, 1.0}, {17, 17}, {});
  const TimeGrid tg{0.5, 16};
  Field data = make_field(g, [](double x, double y) {
    return std::sin(3.14159265358979 * x) * std::sin(3.14159265358979 * y);
  });
  const SpaceTimeField fwd = solve_heat_forward(g, tg, kNu, data, nullptr, Bc::DD);
  const SpaceTimeField bwd = solve_backward(g, tg, kNu, data, nullptr, Bc::DD);
  for (int k = 0; k <= tg.nt; ++k) {
    const double gap =
        (fwd.values.col(k) - bwd.values.col(tg.nt - k)).cwiseAbs().maxCoeff();
    CHECK(gap <= 1e-13);
  }
}

TEST_CASE("default weight profile vanishes outside the time window") {
  const Grid g = build_grid({1.0, 1.0}, {17, 17}, {});
  const TimeGrid tg{1.0, 32};
  const WeightFunction w = default_weight(make_patch(g, {{Edge::Right, 0.0, 1.0}}), tg);
  w.validate();
  CHECK(w.values.rows() == static_cast<Eigen::Index>(w.patch.faces.size()));
  CHECK(w.values.cols() == tg.nt + 1);
  CHECK(w.values.col(0).cwiseAbs().maxCoeff() == 0.0);  // t = 0 < 0.1 T
  CHECK(w.values.col(tg.nt).cwiseAbs().maxCoeff() == 0.0);
  CHECK(w.values.minCoeff() >= 0.0);
  CHECK(w.values.maxCoeff() > 0.0);
}

TEST_CASE("time grid validation") {
  CHECK_THROWS_AS((TimeGrid{1.0, 4}).validate(), PreconditionError);
  CHECK_THROWS_AS((TimeGrid{-1.0, 16}).validate(), PreconditionError);
}
