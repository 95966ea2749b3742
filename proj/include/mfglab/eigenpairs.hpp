#pragma once

#include "mfglab/discretization.hpp"
#include "mfglab/parabolic.hpp"

namespace mfglab {

// Eigenpair of -Lap on the active domain: y normalized in the discrete L2
// norm, mu is the temporal decay rate (spatial eigenvalue is mu / nu).
struct EigenPair {
  double mu = 0.0;
  Field y;
  Bc bc = Bc::DD;

  double spatial_eigenvalue(double nu) const { return mu / nu; }
};

struct EigenOptions {
  int dense_threshold = 2000;  // dense eigensolve at or below this many unknowns
  int max_iterations = 500;
  double residual_tol = 1e-10;
};

// K smallest eigenpairs, discrete-L2 orthonormal, sorted ascending by mu.
std::vector<EigenPair> eigenpairs(const Grid& grid, Bc bc, int count, double nu,
                                  const EigenOptions& opts = {});

// W(x,t) = exp(-mu t) y(x) sampled on the time grid.
SpaceTimeField separable_solution(const EigenPair& pair, const TimeGrid& tg);

}  // namespace mfglab
