#pragma once

#include <functional>
#include <map>

#include "mfglab/mfg.hpp"

namespace mfglab {

// Sorted distinct direction labels (1-based), e.g. {1}, {2}, {1,3}.
using MultiIndex = std::vector<int>;

// Initial-density perturbation directions g_l; the sign flags record which
// directions may be used as positive probes (needed for maximum-principle
// arguments on m^(1)).
struct PerturbationBasis {
  std::vector<Field> directions;

  int size() const { return static_cast<int>(directions.size()); }
  const Field& direction(int label) const { return directions.at(label - 1); }
  void validate(const Grid& grid) const;
};

// Mixed derivative of (u, m) with respect to the perturbation amplitudes
// indexed by `subset`, taken at amplitude zero.
struct LinearizedSolution {
  MultiIndex subset;
  SpaceTimeField u;
  SpaceTimeField m;
  // Assembled right-hand side of the backward u equation; pairing it with
  // the adjoint probe reproduces -nu times the measured flux exactly.
  SpaceTimeField u_source;
};

using SolutionTable = std::map<MultiIndex, LinearizedSolution>;

// Order-1 system in direction g (label l): m^(l) is a pure initial-value
// heat solve, u^(l) a backward solve with source F^(1) m^(l).  In the
// inhomogeneous regimes F^(1) = 0 forces u^(l) = 0 and the cascade flips.
LinearizedSolution first_order(const Grid& grid, const TimeGrid& tg, double nu,
                               const RunningCost& cost, const BoundaryRegime& regime,
                               const Field& g, int label = 1);

LinearizedSolution second_order(const Grid& grid, const TimeGrid& tg, double nu,
                                const RunningCost& cost, const BoundaryRegime& regime,
                                const LinearizedSolution& a, const LinearizedSolution& b);

// General mixed system for |subset| in 2..4.  Sources are assembled from the
// supplied lower-order solutions: set partitions of `subset` against the
// running-cost coefficients, unordered splits for the Hamiltonian cross
// terms and the drift divergence.  Missing lower-order entries raise
// PreconditionError.
LinearizedSolution nth_order(const Grid& grid, const TimeGrid& tg, double nu,
                             const RunningCost& cost, const BoundaryRegime& regime,
                             const SolutionTable& lower, const MultiIndex& subset);

// All nonempty subsets of {1..n} for the given basis, computed in order of
// subset size so every dependency is available.
SolutionTable linearize_cascade(const Grid& grid, const TimeGrid& tg, double nu,
                                const RunningCost& cost, const BoundaryRegime& regime,
                                const PerturbationBasis& basis);

// Numerical mixed derivative of `map` at amplitude zero via the 2^N-point
// central tensor stencil with per-component steps `eps`.  Lattice points are
// visited in a fixed order so the accumulation is deterministic; a solver
// divergence at a lattice point is rethrown with the offending amplitudes
// attached.
Eigen::VectorXd frechet_extract(
    const std::function<Eigen::VectorXd(const std::vector<double>&)>& map,
    const std::vector<double>& eps);

}  // namespace mfglab
