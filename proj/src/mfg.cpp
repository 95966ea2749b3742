#include "mfglab/mfg.hpp"

#include <cmath>

namespace mfglab {

void RunningCost::validate() const {
  if (coeffs.empty()) throw ConfigError("running cost needs at least one coefficient");
  if (expansion_point < 0) throw ConfigError("expansion point must be 0 or positive");
  if (is_class_b() && coeffs[0].values.size() > 0 &&
      coeffs[0].values.cwiseAbs().maxCoeff() != 0.0) {
    throw ConfigError("class B running cost requires F^(1) = 0");
  }
  for (std::size_t i = 1; i < coeffs.size(); ++i) coeffs[0].require_same_grid(coeffs[i]);
}

RunningCost zero_cost(const Grid& grid, int order, double expansion_point) {
  RunningCost c;
  c.expansion_point = expansion_point;
  for (int i = 0; i < order; ++i) c.coeffs.emplace_back(grid);
  return c;
}

Field eval_cost(const RunningCost& cost, const Field& m) {
  cost.coeffs[0].require_same_grid(m);
  Field out(*m.grid);
  Eigen::ArrayXd shifted = m.values.array() - cost.expansion_point;
  Eigen::ArrayXd power = shifted;  // (m - e)^i
  double factorial = 1.0;
  for (int i = 1; i <= cost.order(); ++i) {
    factorial *= i;
    out.values.array() += cost.coeff(i).values.array() * power / factorial;
    power *= shifted;
  }
  return out;
}

namespace {

SpaceTimeField hjb_source(const Grid& grid, const TimeGrid& tg, const RunningCost& cost,
                          const SpaceTimeField& m, const SpaceTimeField& u_prev) {
  SpaceTimeField s(grid, tg);
  for (int k = 0; k <= tg.nt; ++k) {
    Field f = eval_cost(cost, m.level(k));
    const Field gsq = grad_squared_at_nodes(grid, gradient(grid, u_prev.level(k)));
    f.values -= 0.5 * gsq.values;
    s.set_level(k, f);
  }
  return s;
}

SpaceTimeField fp_source(const Grid& grid, const TimeGrid& tg, const SpaceTimeField& m_prev,
                         const SpaceTimeField& u) {
  SpaceTimeField s(grid, tg);
  for (int k = 0; k <= tg.nt; ++k) {
    s.set_level(k, divergence_flux(grid, m_prev.level(k), gradient(grid, u.level(k))));
  }
  return s;
}

}  // namespace

MFGSolution solve_mfg(const Grid& grid, const TimeGrid& tg, double nu,
                      const RunningCost& cost, const Field& m0,
                      const BoundaryRegime& regime, const MFGOptions& opts) {
  regime.validate();
  cost.validate();
  tg.validate();
  if (cost.is_class_b() != regime.inhomogeneous()) {
    throw ConfigError("running-cost class does not match the boundary regime");
  }
  const Bc bc = regime.bc();
  HeatStepper u_stepper(grid, tg, nu, bc, BoundaryData{});
  HeatStepper m_stepper(grid, tg, nu, bc, regime.density_bdata());

  MFGSolution sol;
  sol.u = SpaceTimeField(grid, tg);
  sol.m = forward_with(m_stepper, tg, m0, nullptr);

  double prev_update = std::numeric_limits<double>::infinity();
  int growth_streak = 0;
  const Field zero(grid);
  for (int it = 1; it <= opts.max_iter; ++it) {
    const SpaceTimeField su = hjb_source(grid, tg, cost, sol.m, sol.u);
    SpaceTimeField u_new = backward_with(u_stepper, tg, zero, &su);
    const SpaceTimeField sm = fp_source(grid, tg, sol.m, u_new);
    SpaceTimeField m_new = forward_with(m_stepper, tg, m0, &sm);

    const double update = std::max((u_new.values - sol.u.values).cwiseAbs().maxCoeff(),
                                   (m_new.values - sol.m.values).cwiseAbs().maxCoeff());
    sol.u = std::move(u_new);
    sol.m = std::move(m_new);
    sol.iterations = it;
    sol.final_update = update;
    if (update <= opts.tol) return sol;
    growth_streak = update > prev_update ? growth_streak + 1 : 0;
    if (growth_streak >= 3) {
      throw DivergenceError(
          "Picard iteration diverging (update grew 3 times in a row); "
          "reduce the initial data");
    }
    prev_update = update;
  }
  throw SolverError("Picard iteration did not converge within max_iter",
                    sol.final_update);
}

std::pair<double, double> pde_residual(const Grid& grid, const TimeGrid& tg, double nu,
                                       const MFGSolution& sol, const RunningCost& cost,
                                       const BoundaryRegime& regime) {
  const SparseOperator op = assemble_laplacian(grid, regime.bc());
  const double dt = tg.dt();
  double r_hjb = 0.0, r_fp = 0.0;
  for (int k = 0; k < tg.nt; ++k) {
    const Field uk = sol.u.level(k);
    const Field mk = sol.m.level(k);
    Eigen::VectorXd r = -(sol.u.values.col(k + 1) - sol.u.values.col(k)) / dt;
    Eigen::VectorXd ru(op.n_unknown);
    for (int q = 0; q < op.n_unknown; ++q) ru[q] = r[op.active_of_unknown[q]];
    ru += nu * op.apply(uk);
    const Field gsq = grad_squared_at_nodes(grid, gradient(grid, uk));
    const Field fm = eval_cost(cost, mk);
    ru += 0.5 * op.restrict_unknowns(gsq) - op.restrict_unknowns(fm);
    r_hjb = std::max(r_hjb, ru.cwiseAbs().maxCoeff());
  }
  for (int k = 1; k <= tg.nt; ++k) {
    const Field mk = sol.m.level(k);
    const Field uk = sol.u.level(k);
    Eigen::VectorXd r = (sol.m.values.col(k) - sol.m.values.col(k - 1)) / dt;
    Eigen::VectorXd rm(op.n_unknown);
    for (int q = 0; q < op.n_unknown; ++q) rm[q] = r[op.active_of_unknown[q]];
    rm += nu * op.apply(mk);
    const Field drift = divergence_flux(grid, mk, gradient(grid, uk));
    rm -= op.restrict_unknowns(drift);
    r_fp = std::max(r_fp, rm.cwiseAbs().maxCoeff());
  }
  return {r_hjb, r_fp};
}

}  // namespace mfglab
