#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mfglab/eigenpairs.hpp"

using namespace mfglab;

namespace {
constexpr double kNu = 0.2;
constexpr double kPi = 3.14159265358979323846;

// Exact eigenvalues of the 5-point Dirichlet Laplacian on the unit square:
// lambda_{pq} = (4/h^2)(sin^2(p pi h / 2) + sin^2(q pi h / 2)).
double dirichlet_lambda(int p, int q, double h) {
  auto s = [h](int k) {
    const double t = std::sin(k * kPi * h / 2.0);
    return t * t;
  };
  return 4.0 / (h * h) * (s(p) + s(q));
}
}  // namespace

TEST_CASE("Dirichlet eigenvalues match the closed-form stencil spectrum") {
  const Grid g = build_grid({1.0, 1.0}, {17, 17}, {});
  const double h = g.hx;
  const auto pairs = eigenpairs(g, Bc::DD, 5, kNu);
  const double expected[5] = {
      dirichlet_lambda(1, 1, h), dirichlet_lambda(1, 2, h), dirichlet_lambda(2, 1, h),
      dirichlet_lambda(2, 2, h), dirichlet_lambda(1, 3, h)};
  for (int k = 0; k < 5; ++k) {
    CHECK(pairs[k].spatial_eigenvalue(kNu) ==
          doctest::Approx(expected[k]).epsilon(1e-9));
    CHECK(pairs[k].mu == doctest::Approx(kNu * expected[k]).epsilon(1e-9));
  }
  // Continuum limit: lambda_11 -> 2 pi^2 within O(h^2).
  CHECK(pairs[0].spatial_eigenvalue(kNu) ==
        doctest::Approx(2 * kPi * kPi).epsilon(5e-3));
}

TEST_CASE("eigenvectors are orthonormal in the cell-area inner product") {
  const Grid g = build_grid({1.0, 1.0}, {17, 17}, {});
  const auto pairs = eigenpairs(g, Bc::DD, 6, kNu);
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      const double ip = inner_l2(pairs[a].y, pairs[b].y);
      CHECK(ip == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("Neumann spectrum starts at the constant mode") {
  const Grid g = build_grid({1.0, 1.0}, {17, 17}, {});
  const auto pairs = eigenpairs(g, Bc::DN, 3, kNu);
  CHECK(std::abs(pairs[0].mu) <= 1e-9);
  const double spread =
      pairs[0].y.values.maxCoeff() - pairs[0].y.values.minCoeff();
  CHECK(spread <= 1e-7);
  CHECK(pairs[1].mu > 1e-3);  // spectral gap
}

TEST_CASE("obstacle grid spectrum stays ordered and positive under DD") {
  ObstacleSpec obs;
  obs.shape = ObstacleShape::Rectangle;
  obs.center = {0.5, 0.5};
  obs.half_extents = {0.125, 0.125};
  const Grid g = build_grid({1.0, 1.0}, {25, 25}, obs);
  const auto pairs = eigenpairs(g, Bc::DD, 8, kNu);
  double prev = 0.0;
  for (const auto& p : pairs) {
    CHECK(p.mu > 0.0);
    CHECK(p.mu >= prev - 1e-12);
    prev = p.mu;
  }
  // Domain monotonicity: removing area raises the principal eigenvalue.
  const Grid full = build_grid({1.0, 1.0}, {25, 25}, {});
  const auto base = eigenpairs(full, Bc::DD, 1, kNu);
  CHECK(pairs[0].mu > base[0].mu);
}

TEST_CASE("separable solution samples exp(-mu t) exactly") {
  const Grid g = build_grid({1.0, 1.0}, {17, 17}, {});
  const TimeGrid tg{2.0, 16};
  const auto pairs = eigenpairs(g, Bc::DD, 1, kNu);
  const SpaceTimeField w = separable_solution(pairs[0], tg);
  for (int k = 0; k <= tg.nt; ++k) {
    const Eigen::VectorXd expect =
        std::exp(-pairs[0].mu * k * tg.dt()) * pairs[0].y.values;
    CHECK((w.values.col(k) - expect).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("eigenpair count preconditions") {
  const Grid g = build_grid({1.0, 1.0}, {17, 17}, {});
  CHECK_THROWS_AS(eigenpairs(g, Bc::DD, 0, kNu), PreconditionError);
  CHECK_THROWS_AS(eigenpairs(g, Bc::DD, 10000, kNu), PreconditionError);
}
