#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mfglab/mfg.hpp"

using namespace mfglab;

namespace {

constexpr double kNu = 0.2;
const TimeGrid kTg{1.0, 16};

Grid obstacle_grid() {
  ObstacleSpec obs;
  obs.shape = ObstacleShape::Rectangle;
  obs.center = {0.5, 0.5};
  obs.half_extents = {0.125, 0.125};
  return build_grid({1.0, 1.0}, {25, 25}, obs);
}

RunningCost smooth_cost(const Grid& g, int order, double expansion = 0.0) {
  RunningCost cost;
  cost.expansion_point = expansion;
  for (int i = 1; i <= order; ++i) {
    const double amp = (expansion > 0.0 && i == 1) ? 0.0 : 0.5 / i;
    cost.coeffs.push_back(make_field(g, [amp](double x, double y) {
      return amp * (1.0 + 0.5 * std::sin(3 * x) * std::cos(2 * y));
    }));
  }
  return cost;
}

}  // namespace

TEST_CASE("eval_cost matches the truncated power series by hand") {
  const Grid g = build_grid({1.0, 1.0}, {9, 9}, {});
  RunningCost cost;
  cost.coeffs.push_back(Field(g, 1.0));  // F1 = 1
  cost.coeffs.push_back(Field(g, 2.0));  // F2 = 2
  const Field m(g, 3.0);
  // F(m) = 1*3 + 2*3^2/2 = 12.
  const Field v = eval_cost(cost, m);
  CHECK(v.values.minCoeff() == doctest::Approx(12.0).epsilon(1e-14));
  CHECK(v.values.maxCoeff() == doctest::Approx(12.0).epsilon(1e-14));

  // Class B expansion about g0 = 1: F(m) = 2*(3-1)^2/2 = 4.
  RunningCost b = cost;
  b.expansion_point = 1.0;
  b.coeffs[0] = Field(g, 0.0);
  const Field vb = eval_cost(b, m);
  CHECK(vb.values.maxCoeff() == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("running cost validation") {
  const Grid g = build_grid({1.0, 1.0}, {9, 9}, {});
  RunningCost empty;
  CHECK_THROWS_AS(empty.validate(), ConfigError);
  RunningCost bad = smooth_cost(g, 2, 1.0);
  bad.coeffs[0] = Field(g, 1.0);  // class B must have F1 = 0
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_NOTHROW(smooth_cost(g, 2, 1.0).validate());
}

TEST_CASE("zero data yields the zero solution instantly") {
  const Grid g = obstacle_grid();
  const RunningCost cost = smooth_cost(g, 2);
  const MFGSolution sol =
      solve_mfg(g, kTg, kNu, cost, Field(g), BoundaryRegime{RegimeTag::DH, 0.0});
  CHECK(sol.u.max_abs() <= 1e-14);
  CHECK(sol.m.max_abs() <= 1e-14);
  CHECK(sol.iterations <= 3);
}

TEST_CASE("constant g0 is the stationary state of the inhomogeneous regimes") {
  const Grid g = obstacle_grid();
  const double g0 = 1.0;
  for (RegimeTag tag : {RegimeTag::DI, RegimeTag::NI}) {
    const BoundaryRegime regime{tag, g0};
    const RunningCost cost = smooth_cost(g, 2, g0);
    const MFGSolution sol = solve_mfg(g, kTg, kNu, cost, Field(g, g0), regime);
    CHECK(sol.u.max_abs() <= 1e-11);
    CHECK((sol.m.values.array() - g0).abs().maxCoeff() <= 1e-11);
  }
}

TEST_CASE("converged solutions satisfy the discrete equations") {
  const Grid g = obstacle_grid();
  const BoundaryRegime regime{RegimeTag::DH, 0.0};
  const RunningCost cost = smooth_cost(g, 2);
  Field m0 = make_field(g, [](double x, double y) {
    return 0.02 * (1.0 + std::sin(4 * x) * std::sin(3 * y));
  });
  const MFGSolution sol = solve_mfg(g, kTg, kNu, cost, m0, regime, {1e-12, 200});
  const auto [res_hjb, res_fp] = pde_residual(g, kTg, kNu, sol, cost, regime);
  CHECK(res_hjb <= 1e-9);
  CHECK(res_fp <= 1e-9);
  CHECK(sol.m.min_value() >= -1e-11);
}

TEST_CASE("density stays nonnegative across all four regimes") {
  const Grid g = obstacle_grid();
  for (auto [tag, g0] : {std::pair{RegimeTag::DH, 0.0}, {RegimeTag::NH, 0.0},
                         {RegimeTag::DI, 1.0}, {RegimeTag::NI, 1.0}}) {
    const BoundaryRegime regime{tag, g0};
    const RunningCost cost = smooth_cost(g, 2, g0);
    Field m0 = make_field(g, [g0 = g0](double x, double y) {
      return g0 + 0.05 * (1.0 + std::sin(5 * x) * std::cos(4 * y));
    });
    const MFGSolution sol = solve_mfg(g, kTg, kNu, cost, m0, regime);
    CHECK(sol.m.min_value() >= -1e-10);
  }
}

TEST_CASE("mismatched class and regime are rejected") {
  const Grid g = obstacle_grid();
  const RunningCost class_b = smooth_cost(g, 2, 1.0);
  CHECK_THROWS_AS(
      solve_mfg(g, kTg, kNu, class_b, Field(g), BoundaryRegime{RegimeTag::DH, 0.0}),
      ConfigError);
  CHECK_THROWS_AS(BoundaryRegime(RegimeTag::DI, 0.0).validate(), ConfigError);
}
