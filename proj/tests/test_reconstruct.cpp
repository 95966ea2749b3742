#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mfglab/reconstruct.hpp"

using namespace mfglab;

namespace {

constexpr double kNu = 0.2;
const TimeGrid kTg{1.0, 32};
const std::vector<EdgeSegment> kWindow{{Edge::Right, 0.0, 1.0}};

ObstacleSpec rect_at(double cx, double cy) {
  ObstacleSpec obs;
  obs.shape = ObstacleShape::Rectangle;
  obs.center = {cx, cy};
  obs.half_extents = {0.125, 0.125};
  return obs;
}

double g1(double x, double y) {
  return 1.0 + 0.25 * std::sin(3.14159265358979 * x) * std::sin(3.14159265358979 * y);
}

MeasurementRecord observe(const ObstacleSpec& truth, const BoundaryRegime& regime) {
  const Grid g = build_grid({1.0, 1.0}, {33, 33}, truth);
  const SpaceTimeField m = solve_heat_forward(g, kTg, kNu, make_field(g, g1), nullptr,
                                              regime.bc(), regime.density_bdata());
  const SpaceTimeField u(g, kTg);
  return measure(g, u, m, default_weight(make_patch(g, kWindow), kTg), regime);
}

}  // namespace

TEST_CASE("a single candidate wins by default with infinite margin") {
  const BoundaryRegime regime{RegimeTag::DH, 0.0};
  const MeasurementRecord rec = observe(rect_at(0.5, 0.5), regime);
  const ObstacleVerdict v = detect_obstacle(rec, g1, {rect_at(0.5, 0.5)}, regime, kNu,
                                            {1.0, 1.0}, {33, 33}, kWindow);
  CHECK(v.chosen_index == 0);
  CHECK(v.residuals.size() == 1);
  CHECK(std::isinf(v.margin));
}

TEST_CASE("the true obstacle beats well-separated alternatives") {
  const BoundaryRegime regime{RegimeTag::DH, 0.0};
  const MeasurementRecord rec = observe(rect_at(0.5, 0.5), regime);
  const std::vector<ObstacleSpec> cands{rect_at(0.25, 0.25), rect_at(0.5, 0.5),
                                        rect_at(0.75, 0.75)};
  const ObstacleVerdict v =
      detect_obstacle(rec, g1, cands, regime, kNu, {1.0, 1.0}, {33, 33}, kWindow);
  CHECK(v.chosen_index == 1);
  CHECK(v.chosen == rect_at(0.5, 0.5));
  CHECK(v.margin > 2.0);
  CHECK(v.residuals[1] < v.residuals[0]);
  CHECK(v.residuals[1] < v.residuals[2]);
}

TEST_CASE("duplicate candidates raise an ambiguity error") {
  const BoundaryRegime regime{RegimeTag::DH, 0.0};
  const MeasurementRecord rec = observe(rect_at(0.5, 0.5), regime);
  const std::vector<ObstacleSpec> cands{rect_at(0.5, 0.5), rect_at(0.5, 0.5)};
  CHECK_THROWS_AS(
      detect_obstacle(rec, g1, cands, regime, kNu, {1.0, 1.0}, {33, 33}, kWindow),
      AmbiguityError);
}

TEST_CASE("nonpositive initial density is rejected") {
  const BoundaryRegime regime{RegimeTag::DH, 0.0};
  const MeasurementRecord rec = observe(rect_at(0.5, 0.5), regime);
  auto bad = [](double, double) { return -1.0; };
  CHECK_THROWS_AS(detect_obstacle(rec, bad, {rect_at(0.5, 0.5)}, regime, kNu,
                                  {1.0, 1.0}, {33, 33}, kWindow),
                  PreconditionError);
}

TEST_CASE("probe context passes its own Green-identity self-check") {
  const Grid g = build_grid({1.0, 1.0}, {17, 17}, {});
  const ProbeContext ctx =
      default_probes(g, kTg, kNu, BoundaryRegime{RegimeTag::DH, 0.0}, kWindow, 6);
  CHECK(ctx.directions.size() == 7);  // 6 eigen + 1 constant
  CHECK(ctx.basis.size() == 7);
  CHECK(ctx.probe_gap <= 1e-10);
}

TEST_CASE("probe set can be richer than the recovery basis") {
  const Grid g = build_grid({1.0, 1.0}, {17, 17}, {});
  const BoundaryRegime regime{RegimeTag::DH, 0.0};
  const ProbeContext ctx = default_probes(g, kTg, kNu, regime, kWindow, 6, 3);
  CHECK(ctx.directions.size() == 7);  // 6 eigen + 1 constant
  CHECK(ctx.basis.size() == 4);       // 3 eigen + 1 constant
  CHECK_THROWS_AS((void)default_probes(g, kTg, kNu, regime, kWindow, 4, 6),
                  PreconditionError);
}

TEST_CASE("oracle data recovers a basis-representable first coefficient") {
  const Grid g = build_grid({1.0, 1.0}, {17, 17}, {});
  const BoundaryRegime regime{RegimeTag::DH, 0.0};
  const ProbeContext ctx = default_probes(g, kTg, kNu, regime, kWindow, 8);

  // Truth F1 = 1 + 0.8 * y_1 lies in span(basis) exactly.
  const auto pairs = eigenpairs(g, regime.bc(), 1, kNu);
  RunningCost truth;
  Field f1(g, 1.0);
  f1.values += 0.8 * pairs[0].y.values;
  truth.coeffs.push_back(f1);

  DataSource data;
  data.flux = [&](int order) { return oracle_flux_data(ctx, truth, order); };
  const RecoveryReport rep = recover_cost(ctx, 1, data);
  REQUIRE(rep.ok());
  REQUIRE(rep.stages.size() == 1);
  const Field& rec = rep.stages[0].field;
  const double err = (rec.values - f1.values).cwiseAbs().maxCoeff();
  // The Tikhonov bias on the weakly sensed directions caps the accuracy.
  CHECK(err <= 5e-3 * f1.values.cwiseAbs().maxCoeff());
  CHECK(!rep.stages[0].rank_warning);
}

TEST_CASE("richardson extrapolation beats the plain quotient rung") {
  const Grid g = build_grid({1.0, 1.0}, {17, 17}, {});
  const BoundaryRegime regime{RegimeTag::DH, 0.0};
  const ProbeContext ctx = default_probes(g, kTg, kNu, regime, kWindow, 4);
  RunningCost truth;
  truth.coeffs.push_back(make_field(g, [](double x, double y) {
    return 1.0 + 0.5 * std::sin(3.14159265358979 * x) * std::sin(3.14159265358979 * y);
  }));
  const MFGOptions tight{1e-13, 200};
  const auto exact = oracle_flux_data(ctx, truth, 1);
  const auto plain = quotient_flux_data(ctx, truth, 1, 3e-3, tight);
  const auto rich = richardson_flux_data(ctx, truth, 1, 3e-3, 9e-3, tight);
  double worst_plain = 0.0, worst_rich = 0.0;
  for (size_t p = 0; p < exact.size(); ++p) {
    worst_plain = std::max(worst_plain, std::abs(plain[p] - exact[p]));
    worst_rich = std::max(worst_rich, std::abs(rich[p] - exact[p]));
  }
  CHECK(worst_rich < worst_plain);
  CHECK_THROWS_AS((void)richardson_flux_data(ctx, truth, 1, 3e-3, 3e-3, tight),
                  PreconditionError);
}

TEST_CASE("recovery is blind: stage order matches the class") {
  const Grid g = build_grid({1.0, 1.0}, {17, 17}, {});
  const double g0 = 1.0;
  const BoundaryRegime regime{RegimeTag::DI, g0};
  const ProbeContext ctx = default_probes(g, kTg, kNu, regime, kWindow, 6);
  RunningCost truth;
  truth.expansion_point = g0;
  truth.coeffs.push_back(Field(g));
  truth.coeffs.push_back(Field(g, 0.5));
  DataSource data;
  data.flux = [&](int order) { return oracle_flux_data(ctx, truth, order); };
  const RecoveryReport rep = recover_cost(ctx, 2, data);
  REQUIRE(rep.ok());
  // Class B starts at order 2; F1 is pinned to zero.
  REQUIRE(rep.stages.size() == 1);
  CHECK(rep.stages[0].order == 2);
  CHECK(rep.estimate.coeff(1).values.cwiseAbs().maxCoeff() == 0.0);
  const double err = (rep.estimate.coeff(2).values.array() - 0.5).abs().maxCoeff();
  CHECK(err <= 0.05);
}
