#include "mfglab/parabolic.hpp"

#include <cmath>

namespace mfglab {

HeatStepper::HeatStepper(const Grid& grid, const TimeGrid& tg, double nu, Bc bc,
                         const BoundaryData& bdata)
    : op_(assemble_laplacian(grid, bc)), dt_(tg.dt()), nu_(nu), bdata_(bdata) {
  tg.validate();
  if (!(nu > 0)) throw PreconditionError("diffusion coefficient must be positive");
  Eigen::SparseMatrix<double> A = (dt_ * nu_) * op_.L_uu;
  for (int u = 0; u < op_.n_unknown; ++u) A.coeffRef(u, u) += op_.area[u];
  llt_.compute(A);
  if (llt_.info() != Eigen::Success) throw SolverError("heat step factorization failed");

  // Dirichlet lifting for constant boundary data plus Neumann flux term.
  Field bvals(grid);
  for (int a = 0; a < grid.n_active; ++a) {
    const NodeClass c = grid.node_class[grid.active_nodes[a]];
    if (c == NodeClass::InnerBoundary) bvals.values[a] = bdata.inner;
    if (c == NodeClass::OuterBoundary) bvals.values[a] = bdata.outer;
  }
  lift_ = -(dt_ * nu_) * (op_.L_ub * bvals.values);
  if (bc == Bc::DN && bdata.outer_flux != 0.0) {
    lift_ += (dt_ * nu_ * bdata.outer_flux) * op_.boundary_measure;
  }
}

Eigen::VectorXd HeatStepper::step(const Eigen::VectorXd& prev_u,
                                  const Eigen::VectorXd* source_u,
                                  const Eigen::VectorXd* extra_rhs) const {
  Eigen::VectorXd rhs = prev_u.cwiseProduct(op_.area) + lift_;
  if (source_u) rhs += dt_ * source_u->cwiseProduct(op_.area);
  if (extra_rhs) rhs += *extra_rhs;
  return llt_.solve(rhs);
}

namespace {

void check_finite(const SpaceTimeField& f, const char* what) {
  if (!f.values.allFinite()) throw SolverError(std::string(what) + ": non-finite values");
}

}  // namespace

SpaceTimeField forward_with(const HeatStepper& st, const TimeGrid& tg,
                            const Field& initial, const SpaceTimeField* source) {
  const SparseOperator& op = st.op();
  const BoundaryData& bdata = st.bdata();
  SpaceTimeField out(*op.grid, tg);
  out.set_level(0, initial);
  Eigen::VectorXd u = op.restrict_unknowns(initial);
  for (int k = 1; k <= tg.nt; ++k) {
    if (source) {
      const Eigen::VectorXd s = op.restrict_unknowns(source->level(k));
      u = st.step(u, &s);
    } else {
      u = st.step(u, nullptr);
    }
    out.set_level(k, op.scatter(u, bdata.inner, bdata.outer));
  }
  check_finite(out, "solve_heat_forward");
  return out;
}

SpaceTimeField backward_with(const HeatStepper& st, const TimeGrid& tg,
                             const Field& terminal, const SpaceTimeField* source) {
  const SparseOperator& op = st.op();
  const BoundaryData& bdata = st.bdata();
  SpaceTimeField out(*op.grid, tg);
  out.set_level(tg.nt, terminal);
  Eigen::VectorXd u = op.restrict_unknowns(terminal);
  for (int k = tg.nt - 1; k >= 0; --k) {
    if (source) {
      const Eigen::VectorXd s = op.restrict_unknowns(source->level(k));
      u = st.step(u, &s);
    } else {
      u = st.step(u, nullptr);
    }
    out.set_level(k, op.scatter(u, bdata.inner, bdata.outer));
  }
  check_finite(out, "solve_backward");
  return out;
}

SpaceTimeField solve_heat_forward(const Grid& grid, const TimeGrid& tg, double nu,
                                  const Field& initial, const SpaceTimeField* source,
                                  Bc bc, const BoundaryData& bdata) {
  HeatStepper st(grid, tg, nu, bc, bdata);
  return forward_with(st, tg, initial, source);
}

SpaceTimeField solve_backward(const Grid& grid, const TimeGrid& tg, double nu,
                              const Field& terminal, const SpaceTimeField* source,
                              Bc bc, const BoundaryData& bdata) {
  HeatStepper st(grid, tg, nu, bc, bdata);
  return backward_with(st, tg, terminal, source);
}

void WeightFunction::validate() const {
  if (patch.empty()) throw ValidationError("weight function has an empty patch");
  if (values.size() == 0 || values.minCoeff() < 0.0) {
    throw ValidationError("weight function must be nonnegative");
  }
  if (values.maxCoeff() == 0.0) {
    throw ValidationError("weight function must not vanish identically");
  }
  const int nt = static_cast<int>(values.cols()) - 1;
  if (values.col(0).maxCoeff() > 0 || values.col(nt).maxCoeff() > 0) {
    throw ValidationError("weight function must vanish at the first and last time levels");
  }
}

WeightFunction default_weight(const BoundaryPatch& patch, const TimeGrid& tg) {
  WeightFunction w;
  w.patch = patch;
  const int nf = static_cast<int>(patch.faces.size());
  w.values = Eigen::MatrixXd::Zero(nf, tg.nt + 1);
  const double L = patch.total_length;
  for (int f = 0; f < nf; ++f) {
    const double s = patch.faces[f].arclength / L;
    const double space = 4.0 * s * (1.0 - s);
    for (int k = 0; k <= tg.nt; ++k) {
      const double t = k * tg.dt();
      const double a = 0.1 * tg.T, b = 0.9 * tg.T;
      const double time = (t > a && t < b) ? (t - a) * (b - t) / (0.16 * tg.T * tg.T) : 0.0;
      w.values(f, k) = space * time;
    }
  }
  w.validate();
  return w;
}

namespace {

// Gradient of the weighted flux functional with respect to the unknown values
// at one time level, i.e. gamma with flux = sum_k dt <gamma^k, w^k>.
Eigen::VectorXd flux_functional_gradient(const Grid& grid, const SparseOperator& op,
                                         const WeightFunction& weight,
                                         MeasureRegime regime, int k) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(op.n_unknown);
  for (std::size_t f = 0; f < weight.patch.faces.size(); ++f) {
    const auto& face = weight.patch.faces[f];
    const double w = weight.values(static_cast<int>(f), k) * face.length;
    if (w == 0.0) continue;
    if (regime == MeasureRegime::Neumann) {
      const int a0 = grid.active_index[grid.idx(face.i, face.j)];
      const int u0 = op.unknown_of_active[a0];
      if (u0 >= 0) g[u0] += w;
      continue;
    }
    int di = 0, dj = 0;
    double h = grid.hx;
    switch (face.edge) {
      case Edge::Left: di = 1; h = grid.hx; break;
      case Edge::Right: di = -1; h = grid.hx; break;
      case Edge::Bottom: dj = 1; h = grid.hy; break;
      case Edge::Top: dj = -1; h = grid.hy; break;
    }
    // (3 f0 - 4 f1 + f2) / (2h); f0 is Dirichlet (zero) in the linearized
    // systems this functional is paired with.
    const int a0 = grid.active_index[grid.idx(face.i, face.j)];
    const int a1 = grid.active_index[grid.idx(face.i + di, face.j + dj)];
    const int a2 = grid.active_index[grid.idx(face.i + 2 * di, face.j + 2 * dj)];
    const int u0 = op.unknown_of_active[a0];
    const int u1 = op.unknown_of_active[a1];
    const int u2 = op.unknown_of_active[a2];
    if (u0 >= 0) g[u0] += 3.0 * w / (2.0 * h);
    if (u1 >= 0) g[u1] += -4.0 * w / (2.0 * h);
    if (u2 >= 0) g[u2] += w / (2.0 * h);
  }
  return g;
}

}  // namespace

SpaceTimeField adjoint_probe_b(const Grid& grid, const TimeGrid& tg, double nu,
                               const WeightFunction& weight, MeasureRegime regime) {
  weight.validate();
  const Bc bc = regime == MeasureRegime::Dirichlet ? Bc::DD : Bc::DN;
  HeatStepper st(grid, tg, nu, bc);
  const SparseOperator& op = st.op();
  SpaceTimeField b(grid, tg);
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(op.n_unknown);
  const double dt = tg.dt();
  for (int k = 0; k < tg.nt; ++k) {
    const Eigen::VectorXd c =
        -nu * flux_functional_gradient(grid, op, weight, regime, k);
    const Eigen::VectorXd extra = dt * c;
    lam = st.step(lam, nullptr, &extra);
    b.set_level(k, op.scatter(lam));
  }
  // One trailing source-free step keeps the last level populated; the moment
  // pairing never reads it.
  lam = st.step(lam, nullptr);
  b.set_level(tg.nt, op.scatter(lam));
  check_finite(b, "adjoint_probe_b");
  return b;
}

}  // namespace mfglab
