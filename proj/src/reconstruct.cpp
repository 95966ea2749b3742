#include "mfglab/reconstruct.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <sstream>

namespace mfglab {

namespace {

double trace_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      const BoundaryPatch& patch, double dt) {
  double acc = 0.0;
  for (Eigen::Index k = 1; k < a.cols(); ++k) {
    for (Eigen::Index f = 0; f < a.rows(); ++f) {
      const double d = a(f, k) - b(f, k);
      acc += dt * patch.faces[static_cast<size_t>(f)].length * d * d;
    }
  }
  return std::sqrt(acc);
}

Eigen::MatrixXd density_channel(const Grid& grid, const SpaceTimeField& m,
                                const BoundaryPatch& patch, MeasureRegime regime) {
  const int nf = static_cast<int>(patch.faces.size());
  Eigen::MatrixXd out(nf, m.tg.nt + 1);
  for (int k = 0; k <= m.tg.nt; ++k) {
    const Field level = m.level(k);
    const std::vector<double> q = regime == MeasureRegime::Dirichlet
                                      ? normal_derivative(grid, level, patch)
                                      : boundary_trace(grid, level, patch);
    for (int f = 0; f < nf; ++f) out(f, k) = q[f];
  }
  return out;
}

RunningCost extended(const RunningCost& cost, const Grid& grid, int order) {
  RunningCost out = cost;
  while (out.order() < order) out.coeffs.emplace_back(grid);
  return out;
}

// Zero out the current and higher orders: the inversion may only see what
// has already been recovered.
RunningCost blinded(const RunningCost& known, const Grid& grid, int order) {
  RunningCost out = extended(known, grid, order);
  for (int i = order; i <= out.order(); ++i) out.coeffs[i - 1] = Field(grid);
  return out;
}

MultiIndex full_subset(int order) {
  MultiIndex s(order);
  for (int i = 0; i < order; ++i) s[i] = i + 1;
  return s;
}

}  // namespace

ObstacleVerdict detect_obstacle(const MeasurementRecord& measured,
                                const std::function<double(double, double)>& g1,
                                const std::vector<ObstacleSpec>& candidates,
                                const BoundaryRegime& regime, double nu,
                                std::array<double, 2> domain_size,
                                std::array<int, 2> resolution,
                                const std::vector<EdgeSegment>& window) {
  regime.validate();
  if (candidates.empty()) throw PreconditionError("empty candidate set");
  ObstacleVerdict verdict;
  verdict.residuals.reserve(candidates.size());
  const double dt = measured.tg.dt();
  for (const auto& cand : candidates) {
    const Grid grid = build_grid(domain_size, resolution, cand);
    const Field g = make_field(grid, g1);
    if (g.values.minCoeff() <= 0.0) {
      throw PreconditionError("obstacle probe g1 must be positive on every candidate");
    }
    const BoundaryPatch patch = make_patch(grid, window);
    if (static_cast<Eigen::Index>(patch.faces.size()) != measured.density_series.rows()) {
      throw PreconditionError("candidate window does not match the measured trace");
    }
    // The first-order density is a pure heat flow in every regime (the value
    // coupling drops at this order), so the candidate trace needs no cost.
    const SpaceTimeField m =
        solve_heat_forward(grid, measured.tg, nu, g, nullptr, regime.bc());
    const Eigen::MatrixXd trace =
        density_channel(grid, m, patch, regime.measure_regime());
    verdict.residuals.push_back(
        trace_residual(trace, measured.density_series, patch, dt));
  }
  const auto best = std::min_element(verdict.residuals.begin(), verdict.residuals.end());
  verdict.chosen_index = static_cast<int>(best - verdict.residuals.begin());
  verdict.chosen = candidates[static_cast<size_t>(verdict.chosen_index)];
  std::vector<int> tie;
  double runner_up = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < candidates.size(); ++c) {
    if (verdict.residuals[c] <= 2.0 * *best) tie.push_back(static_cast<int>(c));
    if (static_cast<int>(c) != verdict.chosen_index) {
      runner_up = std::min(runner_up, verdict.residuals[c]);
    }
  }
  if (tie.size() > 1) {
    std::ostringstream os;
    os << "obstacle candidates are not separated; tie set {";
    for (size_t i = 0; i < tie.size(); ++i) os << (i ? "," : "") << tie[i];
    os << "} all within 2x of the best residual " << *best;
    throw AmbiguityError(os.str());
  }
  verdict.margin = candidates.size() == 1
                       ? std::numeric_limits<double>::infinity()
                       : runner_up / std::max(*best, 1e-300);
  return verdict;
}

ProbeContext default_probes(const Grid& grid, const TimeGrid& tg, double nu,
                            const BoundaryRegime& regime,
                            const std::vector<EdgeSegment>& window, int k,
                            int basis_k) {
  regime.validate();
  if (basis_k < 0) basis_k = k;
  if (basis_k > k) throw PreconditionError("basis_k must not exceed the probe count k");
  ProbeContext ctx;
  ctx.grid = &grid;
  ctx.tg = tg;
  ctx.nu = nu;
  ctx.regime = regime;
  const std::vector<EigenPair> pairs = eigenpairs(grid, regime.bc(), k, nu);
  for (int i = 0; i < k; ++i) {
    ctx.directions.push_back(pairs[static_cast<size_t>(i)].y);
    if (i < basis_k) ctx.basis.push_back(pairs[static_cast<size_t>(i)].y);
  }
  const Field one(grid, 1.0);
  ctx.directions.push_back(one);
  ctx.basis.push_back(one);
  ctx.weight = default_weight(make_patch(grid, window), tg);
  ctx.b = adjoint_probe_b(grid, tg, nu, ctx.weight, regime.measure_regime());

  // Self-check of the probe against a manufactured source.
  SpaceTimeField src(grid, tg);
  const Field bump = make_field(
      grid, [](double x, double y) { return 1.0 + std::sin(2.0 * x) * std::cos(y); });
  for (int level = 0; level <= tg.nt; ++level) src.set_level(level, bump);
  const SpaceTimeField w =
      solve_backward(grid, tg, nu, Field(grid), &src, regime.bc());
  ctx.probe_gap = moment_identity(grid, tg, nu, src, w, ctx.weight,
                                  regime.measure_regime(), &ctx.b)
                      .gap;
  return ctx;
}

CoefficientEstimate recover_coefficient(const ProbeContext& ctx, int order,
                                        const RunningCost& known,
                                        const std::vector<double>& flux_data) {
  if (!ctx.grid) throw PreconditionError("probe context is empty");
  if (ctx.probe_gap > 1e-6) {
    throw PreconditionError("adjoint probe fails its Green-identity check");
  }
  const int np = static_cast<int>(ctx.directions.size());
  const int nb = static_cast<int>(ctx.basis.size());
  if (static_cast<int>(flux_data.size()) != np) {
    throw PreconditionError("one flux datum per probe direction is required");
  }
  const Grid& grid = *ctx.grid;
  const RunningCost blind = blinded(known, grid, order);
  const Eigen::VectorXd areas = cell_areas(grid);
  const double dt = ctx.tg.dt();

  Eigen::MatrixXd A(np, nb);
  Eigen::VectorXd rhs(np);
  for (int p = 0; p < np; ++p) {
    PerturbationBasis pb;
    for (int l = 0; l < order; ++l) pb.directions.push_back(ctx.directions[p]);
    const SolutionTable table =
        linearize_cascade(grid, ctx.tg, ctx.nu, blind, ctx.regime, pb);
    const LinearizedSolution& partial = table.at(full_subset(order));

    // Everything except the F^(order)-weighted all-singleton term is already
    // accounted for by the partial solve; its flux converts exactly through
    // the probe, so the datum reduces to a flux difference.
    rhs[p] = -ctx.nu * (flux_data[p] -
                        flux_functional(grid, partial.u, ctx.weight,
                                        ctx.regime.measure_regime()));

    Eigen::VectorXd kernel = Eigen::VectorXd::Zero(grid.n_active);
    for (int level = 0; level < ctx.tg.nt; ++level) {
      Eigen::VectorXd prod = ctx.b.values.col(level);
      for (int l = 1; l <= order; ++l) {
        prod = prod.cwiseProduct(table.at({l}).m.values.col(level));
      }
      kernel += dt * prod;
    }
    for (int j = 0; j < nb; ++j) {
      A(p, j) = kernel.cwiseProduct(areas).dot(ctx.basis[j].values);
    }
  }

  // Row equilibration: probe kernels decay at very different rates, so the
  // raw rows differ by orders of magnitude and the normal matrix condition
  // reflects that scaling rather than genuine redundancy.  Scaling each
  // equation by its row norm is exact for consistent data and balances the
  // per-datum noise.
  if (ctx.equilibrate) {
    double max_rn = 0.0;
    for (int p = 0; p < np; ++p) max_rn = std::max(max_rn, A.row(p).norm());
    for (int p = 0; p < np; ++p) {
      const double rn = std::max(A.row(p).norm(), ctx.equilibrate_floor * max_rn);
      if (rn > 0) {
        A.row(p) /= rn;
        rhs[p] /= rn;
      }
    }
  }

  const Eigen::MatrixXd N = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(N);
  const double top = es.eigenvalues().maxCoeff();
  const double bottom = es.eigenvalues().minCoeff();
  CoefficientEstimate est;
  est.order = order;
  est.lambda = ctx.lambda_scale * std::max(top, 0.0);
  est.condition = top / std::max(bottom, 1e-300);
  est.rank_warning = bottom < 1e-12 * top;
  const Eigen::MatrixXd reg =
      N + est.lambda * Eigen::MatrixXd::Identity(nb, nb);
  est.coefficients = reg.ldlt().solve(A.transpose() * rhs);
  est.residual = (A * est.coefficients - rhs).norm();
  if (!est.coefficients.allFinite()) {
    throw SolverError("coefficient least-squares produced non-finite values");
  }
  est.field = Field(grid);
  for (int j = 0; j < nb; ++j) {
    est.field.values += est.coefficients[j] * ctx.basis[j].values;
  }
  return est;
}

RecoveryReport recover_cost(const ProbeContext& ctx, int max_order,
                            const DataSource& data) {
  RecoveryReport report;
  const Grid& grid = *ctx.grid;
  report.estimate.expansion_point = ctx.regime.inhomogeneous() ? ctx.regime.g0 : 0.0;
  const int start = ctx.regime.inhomogeneous() ? 2 : 1;
  for (int i = 1; i <= max_order; ++i) report.estimate.coeffs.emplace_back(grid);
  // Parallel chain fed by the coarse rung only; its spread against the main
  // chain is the per-stage noise floor and includes propagated error.
  RunningCost coarse_estimate = report.estimate;
  for (int i = start; i <= max_order; ++i) {
    try {
      const std::vector<double> flux = data.flux(i);
      CoefficientEstimate est = recover_coefficient(ctx, i, report.estimate, flux);
      double floor = 0.0;
      if (data.flux_coarse) {
        const CoefficientEstimate coarse =
            recover_coefficient(ctx, i, coarse_estimate, data.flux_coarse(i));
        floor = (est.field.values - coarse.field.values).cwiseAbs().maxCoeff();
        coarse_estimate.coeffs[i - 1] = coarse.field;
      }
      report.estimate.coeffs[i - 1] = est.field;
      report.stages.push_back(std::move(est));
      report.noise_floor.push_back(floor);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "order " << i << " stage failed: " << e.what();
      report.error = os.str();
      break;
    }
  }
  return report;
}

std::vector<double> oracle_flux_data(const ProbeContext& ctx, const RunningCost& truth,
                                     int order) {
  const Grid& grid = *ctx.grid;
  std::vector<double> out;
  const RunningCost cost = extended(truth, grid, std::max(truth.order(), 1));
  for (const auto& dir : ctx.directions) {
    PerturbationBasis pb;
    for (int l = 0; l < order; ++l) pb.directions.push_back(dir);
    const SolutionTable table =
        linearize_cascade(grid, ctx.tg, ctx.nu, cost, ctx.regime, pb);
    out.push_back(flux_functional(grid, table.at(full_subset(order)).u, ctx.weight,
                                  ctx.regime.measure_regime()));
  }
  return out;
}

std::vector<double> quotient_flux_data(const ProbeContext& ctx, const RunningCost& truth,
                                       int order, double eps, const MFGOptions& opts) {
  const Grid& grid = *ctx.grid;
  std::vector<double> out;
  const double background = ctx.regime.inhomogeneous() ? ctx.regime.g0 : 0.0;
  for (const auto& dir : ctx.directions) {
    auto map = [&](const std::vector<double>& amplitudes) {
      Field m0(grid, background);
      for (double a : amplitudes) m0.values += a * dir.values;
      const MFGSolution sol = solve_mfg(grid, ctx.tg, ctx.nu, truth, m0, ctx.regime, opts);
      Eigen::VectorXd v(1);
      v[0] = flux_functional(grid, sol.u, ctx.weight, ctx.regime.measure_regime());
      return v;
    };
    out.push_back(frechet_extract(map, std::vector<double>(order, eps))[0]);
  }
  return out;
}

std::vector<double> richardson_flux_data(const ProbeContext& ctx,
                                         const RunningCost& truth, int order,
                                         double eps_fine, double eps_coarse,
                                         const MFGOptions& opts) {
  if (!(eps_fine > 0.0) || !(eps_coarse > eps_fine)) {
    throw PreconditionError("richardson rungs require 0 < eps_fine < eps_coarse");
  }
  std::vector<double> fine = quotient_flux_data(ctx, truth, order, eps_fine, opts);
  const std::vector<double> coarse =
      quotient_flux_data(ctx, truth, order, eps_coarse, opts);
  const double r2 = (eps_coarse / eps_fine) * (eps_coarse / eps_fine);
  for (size_t p = 0; p < fine.size(); ++p) {
    fine[p] = (r2 * fine[p] - coarse[p]) / (r2 - 1.0);
  }
  return fine;
}

}  // namespace mfglab
