#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "mfglab/eigenpairs.hpp"
#include "mfglab/measurement.hpp"

using namespace mfglab;

namespace {

constexpr double kNu = 0.2;
const TimeGrid kTg{1.0, 32};

Grid plain_grid() { return build_grid({1.0, 1.0}, {17, 17}, {}); }

WeightFunction right_window(const Grid& g) {
  return default_weight(make_patch(g, {{Edge::Right, 0.0, 1.0}}), kTg);
}

SpaceTimeField manufactured_source(const Grid& g) {
  SpaceTimeField s(g, kTg);
  const Field f = make_field(g, [](double x, double y) {
    return 1.0 + std::sin(2 * x) * std::cos(y);
  });
  for (int k = 0; k <= kTg.nt; ++k) s.values.col(k) = f.values;
  return s;
}

}  // namespace

TEST_CASE("flux functional is linear and vanishes on the zero field") {
  const Grid g = plain_grid();
  const WeightFunction w = right_window(g);
  const SpaceTimeField zero(g, kTg);
  CHECK(flux_functional(g, zero, w, MeasureRegime::Dirichlet) == 0.0);

  const auto pairs = eigenpairs(g, Bc::DD, 1, kNu);
  const SpaceTimeField f = separable_solution(pairs[0], kTg);
  SpaceTimeField f2 = f;
  f2.values *= -2.5;
  const double a = flux_functional(g, f, w, MeasureRegime::Dirichlet);
  const double b = flux_functional(g, f2, w, MeasureRegime::Dirichlet);
  CHECK(a != 0.0);
  CHECK(b == doctest::Approx(-2.5 * a).epsilon(1e-12));
}

TEST_CASE("adjoint probe pairs interior sources with the boundary flux") {
  const Grid g = plain_grid();
  const WeightFunction w = right_window(g);
  const SpaceTimeField src = manufactured_source(g);
  for (MeasureRegime mr : {MeasureRegime::Dirichlet, MeasureRegime::Neumann}) {
    const Bc bc = mr == MeasureRegime::Dirichlet ? Bc::DD : Bc::DN;
    const SpaceTimeField sol = solve_backward(g, kTg, kNu, Field(g), &src, bc);
    const MomentIdentity mi = moment_identity(g, kTg, kNu, src, sol, w, mr);
    CHECK(std::abs(mi.interior) > 1e-8);  // nondegenerate pairing
    CHECK(mi.gap <= 1e-10);
  }
}

TEST_CASE("precomputed probe reproduces the pairing") {
  const Grid g = plain_grid();
  const WeightFunction w = right_window(g);
  const SpaceTimeField src = manufactured_source(g);
  const SpaceTimeField b = adjoint_probe_b(g, kTg, kNu, w, MeasureRegime::Dirichlet);
  const SpaceTimeField sol = solve_backward(g, kTg, kNu, Field(g), &src, Bc::DD);
  const MomentIdentity mi =
      moment_identity(g, kTg, kNu, src, sol, w, MeasureRegime::Dirichlet, &b);
  CHECK(mi.gap <= 1e-10);
  CHECK(probe_pairing(g, src, b) == doctest::Approx(mi.interior).epsilon(1e-13));
}

TEST_CASE("measurement channels follow the regime") {
  const Grid g = plain_grid();
  const WeightFunction w = right_window(g);
  const auto pairs = eigenpairs(g, Bc::DD, 1, kNu);
  const SpaceTimeField u = separable_solution(pairs[0], kTg);
  SpaceTimeField m = u;
  m.values *= 0.5;
  const MeasurementRecord rec = measure(g, u, m, w, BoundaryRegime{RegimeTag::DH, 0.0});
  CHECK(rec.value_channel ==
        doctest::Approx(flux_functional(g, u, w, MeasureRegime::Dirichlet))
            .epsilon(1e-13));
  CHECK(rec.density_series.rows() == static_cast<Eigen::Index>(w.patch.faces.size()));
  CHECK(rec.density_series.cols() == kTg.nt + 1);
}

TEST_CASE("noise is deterministic in the seed and bounded by the level") {
  const Grid g = plain_grid();
  const WeightFunction w = right_window(g);
  const auto pairs = eigenpairs(g, Bc::DD, 1, kNu);
  const SpaceTimeField u = separable_solution(pairs[0], kTg);
  const MeasurementRecord clean =
      measure(g, u, u, w, BoundaryRegime{RegimeTag::DH, 0.0});

  MeasurementRecord noisy1 = clean, noisy2 = clean, same = clean;
  apply_noise(noisy1, 0.01, 7);
  apply_noise(noisy2, 0.01, 8);
  apply_noise(same, 0.01, 7);
  CHECK(record_distance(noisy1, same) == 0.0);
  CHECK(record_distance(noisy1, noisy2) > 0.0);
  // Multiplicative noise: |noisy - clean| <= level * |clean| entrywise.
  const double bound =
      0.01 * clean.density_series.cwiseAbs().maxCoeff() + 1e-15;
  CHECK((noisy1.density_series - clean.density_series).cwiseAbs().maxCoeff() <= bound);

  MeasurementRecord untouched = clean;
  apply_noise(untouched, 0.0, 1);
  CHECK(record_distance(untouched, clean) == 0.0);
}

TEST_CASE("records survive a JSON round trip") {
  const Grid g = plain_grid();
  const WeightFunction w = right_window(g);
  const auto pairs = eigenpairs(g, Bc::DD, 1, kNu);
  const SpaceTimeField u = separable_solution(pairs[0], kTg);
  MeasurementRecord rec = measure(g, u, u, w, BoundaryRegime{RegimeTag::DH, 0.0});
  apply_noise(rec, 0.02, 3);

  const std::string path = "/tmp/mfglab_test_record.json";
  save_record(rec, path);
  const MeasurementRecord back = load_record(g, path);
  CHECK(record_distance(rec, back) <= 1e-15);
  CHECK(back.tag == rec.tag);
  CHECK(back.patch.faces.size() == rec.patch.faces.size());
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_record(g, "/tmp/does_not_exist_mfglab.json"), ConfigError);
}

TEST_CASE("linearized measurement differentiates the record pipeline") {
  const Grid g = plain_grid();
  const WeightFunction w = right_window(g);
  const auto pairs = eigenpairs(g, Bc::DD, 1, kNu);
  // Pipeline linear in the amplitude: the quotient must reproduce the
  // unit-amplitude record exactly (up to roundoff).
  auto pipeline = [&](const std::vector<double>& amp) {
    SpaceTimeField u = separable_solution(pairs[0], kTg);
    u.values *= amp[0];
    return measure(g, u, u, w, BoundaryRegime{RegimeTag::DH, 0.0});
  };
  const MeasurementRecord derivative = linearized_measurement(pipeline, {1e-3});
  const MeasurementRecord unit = pipeline({1.0});
  CHECK(std::abs(derivative.value_channel - unit.value_channel) <= 1e-10);
  CHECK((derivative.density_series - unit.density_series).cwiseAbs().maxCoeff() <=
        1e-10);
}
