#pragma once

#include "mfglab/eigenpairs.hpp"
#include "mfglab/linearize.hpp"
#include "mfglab/measurement.hpp"

namespace mfglab {

struct ObstacleVerdict {
  ObstacleSpec chosen;
  int chosen_index = -1;
  std::vector<double> residuals;  // one per candidate, same order as input
  double margin = 0.0;            // runner-up residual / winner residual
};

// Candidate-set surrogate of unique continuation: simulate the first-order
// density on each candidate geometry (pure heat at this order, in every
// regime) and match the window trace.  Candidates whose residual is within
// twice the best form a tie set; more than one member raises AmbiguityError.
ObstacleVerdict detect_obstacle(const MeasurementRecord& measured,
                                const std::function<double(double, double)>& g1,
                                const std::vector<ObstacleSpec>& candidates,
                                const BoundaryRegime& regime, double nu,
                                std::array<double, 2> domain_size,
                                std::array<int, 2> resolution,
                                const std::vector<EdgeSegment>& window);

struct CoefficientEstimate {
  int order = 0;
  Field field;                 // recovered F^(order)
  Eigen::VectorXd coefficients;
  double residual = 0.0;       // unregularized least-squares residual
  double condition = 0.0;      // of the normal matrix
  double lambda = 0.0;         // Tikhonov weight actually used
  bool rank_warning = false;
};

// Everything the moment inversion needs that does not depend on the unknown
// cost: probe initial fields, the measurement weight with its adjoint probe,
// and the expansion basis.
struct ProbeContext {
  const Grid* grid = nullptr;
  TimeGrid tg;
  double nu = 0.0;
  BoundaryRegime regime;
  std::vector<Field> directions;
  WeightFunction weight;
  SpaceTimeField b;
  std::vector<Field> basis;
  // Calibrated for quotient-grade data (relative error ~1e-6): large enough
  // to damp the noise amplification of the weakly sensed directions, small
  // enough to keep the regularization bias near 0.1%.
  double lambda_scale = 1e-12;
  // Scale each moment equation by its row norm before solving.  Exact for
  // consistent data; harmful when the per-datum error is roughly constant
  // in absolute terms (difference-quotient data), because dividing a weak
  // row by its tiny norm amplifies that error.
  bool equilibrate = true;
  // Cap on the equilibration boost: rows are scaled by
  // max(row_norm, equilibrate_floor * max_row_norm), so a row weaker than
  // the floor keeps a proportionally small weight instead of having its
  // (absolute) data error inflated by the full 1/row_norm factor.
  // Calibrated 1e-4: caps the noise amplification of the weakest probe
  // rows at 1e4 while leaving consistent data exact.
  double equilibrate_floor = 1e-4;
  double probe_gap = 0.0;  // Green-identity gap of b, measured at build time
};

// K eigen-directions plus one constant direction; the recovery basis keeps
// the first `basis_k` eigenfunctions plus the constant (all of them when
// basis_k < 0).  Keeping the probe set richer than the basis turns the
// moment system overdetermined, which is what controls its conditioning:
// a square system at k = 16 has condition ~1e14 because the high-mode
// probe rows are exponentially damped, while 17 probes over a 10-function
// basis stays near 1e4.  Verifies the adjoint probe against a manufactured
// source before returning.
ProbeContext default_probes(const Grid& grid, const TimeGrid& tg, double nu,
                            const BoundaryRegime& regime,
                            const std::vector<EdgeSegment>& window, int k = 16,
                            int basis_k = -1);

// Order-i moment inversion.  `known` carries the coefficients recovered so
// far (order >= i entries are ignored and treated as zero); `flux_data` is
// one order-i linearized value-channel datum per probe direction, produced
// by either the oracle or the measurement-driven path.
CoefficientEstimate recover_coefficient(const ProbeContext& ctx, int order,
                                        const RunningCost& known,
                                        const std::vector<double>& flux_data);

// Blind data interface: the harness fills these from either direct
// linearized solves of the planted truth (oracle mode) or difference
// quotients of the nonlinear pipeline (measurement mode).
struct DataSource {
  std::function<std::vector<double>(int order)> flux;
  // Optional second rung of the quotient ladder; enables the per-order noise
  // floor in the report.  The coarse data drives its own self-consistent
  // recovery chain (each stage blinded with the coarse chain's lower-order
  // estimates), so the per-stage spread between the two chains includes the
  // error propagated from earlier stages, not just the local data noise.
  std::function<std::vector<double>(int order)> flux_coarse;
};

struct RecoveryReport {
  RunningCost estimate;
  std::vector<CoefficientEstimate> stages;
  std::vector<double> noise_floor;  // sup-norm spread between ladder rungs, per stage
  std::string error;                // empty on success; stages hold the partial result

  bool ok() const { return error.empty(); }
};

// Inductive loop i = 1..P (class A) or 2..P (class B).
RecoveryReport recover_cost(const ProbeContext& ctx, int max_order,
                            const DataSource& data);

// Harness-side data producers (these see the planted truth; the recovery
// path above never does).
std::vector<double> oracle_flux_data(const ProbeContext& ctx, const RunningCost& truth,
                                     int order);
std::vector<double> quotient_flux_data(const ProbeContext& ctx, const RunningCost& truth,
                                       int order, double eps,
                                       const MFGOptions& opts = {1e-12, 200});

// Two-rung Richardson extrapolation of the difference quotients:
// (r^2 D(eps_fine) - D(eps_coarse)) / (r^2 - 1) with r = eps_coarse/eps_fine
// cancels the O(eps^2) truncation term of the central stencils.
std::vector<double> richardson_flux_data(const ProbeContext& ctx,
                                         const RunningCost& truth, int order,
                                         double eps_fine, double eps_coarse,
                                         const MFGOptions& opts = {1e-12, 200});

}  // namespace mfglab
