#include "mfglab/discretization.hpp"

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <vector>

namespace mfglab {

Eigen::VectorXd cell_areas(const Grid& g) {
  Eigen::VectorXd areas(g.n_active);
  for (int a = 0; a < g.n_active; ++a) {
    const int n = g.active_nodes[a];
    const int i = n % g.nx, j = n / g.nx;
    const double wx = g.hx * ((i > 0 ? 0.5 : 0.0) + (i < g.nx - 1 ? 0.5 : 0.0));
    const double wy = g.ny == 1
                          ? 1.0
                          : g.hy * ((j > 0 ? 0.5 : 0.0) + (j < g.ny - 1 ? 0.5 : 0.0));
    areas[a] = wx * wy;
  }
  return areas;
}

namespace {

double face_overlap_x(const Grid& g, int j) {
  // y-extent shared by the cells of two x-adjacent nodes in row j.
  if (g.ny == 1) return 1.0;
  return g.hy * ((j > 0 ? 0.5 : 0.0) + (j < g.ny - 1 ? 0.5 : 0.0));
}

double face_overlap_y(const Grid& g, int i) {
  return g.hx * ((i > 0 ? 0.5 : 0.0) + (i < g.nx - 1 ? 0.5 : 0.0));
}

}  // namespace

SparseOperator assemble_laplacian(const Grid& grid, Bc bc) {
  SparseOperator op;
  op.grid = &grid;
  op.bc = bc;
  op.unknown_of_active.assign(grid.n_active, -1);
  for (int a = 0; a < grid.n_active; ++a) {
    const NodeClass c = grid.node_class[grid.active_nodes[a]];
    const bool unknown =
        c == NodeClass::Interior || (bc == Bc::DN && c == NodeClass::OuterBoundary);
    if (unknown) {
      op.unknown_of_active[a] = static_cast<int>(op.active_of_unknown.size());
      op.active_of_unknown.push_back(a);
    }
  }
  op.n_unknown = static_cast<int>(op.active_of_unknown.size());

  const Eigen::VectorXd areas = cell_areas(grid);
  op.area.resize(op.n_unknown);
  op.boundary_measure = Eigen::VectorXd::Zero(op.n_unknown);
  for (int u = 0; u < op.n_unknown; ++u) {
    const int a = op.active_of_unknown[u];
    op.area[u] = areas[a];
    const int n = grid.active_nodes[a];
    const int i = n % grid.nx, j = n / grid.nx;
    if (grid.node_class[n] == NodeClass::OuterBoundary) {
      double len = 0.0;
      if (i == 0 || i == grid.nx - 1) len += face_overlap_x(grid, j);
      if (grid.ny > 1 && (j == 0 || j == grid.ny - 1)) len += face_overlap_y(grid, i);
      op.boundary_measure[u] = len;
    }
  }

  std::vector<Eigen::Triplet<double>> tuu, tub;
  auto add_face = [&](int a, int b, double cond) {
    const int ua = op.unknown_of_active[a], ub = op.unknown_of_active[b];
    if (ua < 0 && ub < 0) return;
    if (ua >= 0) tuu.emplace_back(ua, ua, cond);
    if (ub >= 0) tuu.emplace_back(ub, ub, cond);
    if (ua >= 0 && ub >= 0) {
      tuu.emplace_back(ua, ub, -cond);
      tuu.emplace_back(ub, ua, -cond);
    } else if (ua >= 0) {
      tub.emplace_back(ua, b, -cond);
    } else {
      tub.emplace_back(ub, a, -cond);
    }
  };
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const int a = grid.active_index[grid.idx(i, j)];
      if (a < 0) continue;
      if (i + 1 < grid.nx) {
        const int b = grid.active_index[grid.idx(i + 1, j)];
        if (b >= 0) add_face(a, b, face_overlap_x(grid, j) / grid.hx);
      }
      if (j + 1 < grid.ny) {
        const int b = grid.active_index[grid.idx(i, j + 1)];
        if (b >= 0) add_face(a, b, face_overlap_y(grid, i) / grid.hy);
      }
    }
  }
  op.L_uu.resize(op.n_unknown, op.n_unknown);
  op.L_uu.setFromTriplets(tuu.begin(), tuu.end());
  op.L_ub.resize(op.n_unknown, grid.n_active);
  op.L_ub.setFromTriplets(tub.begin(), tub.end());
  return op;
}

Eigen::VectorXd SparseOperator::restrict_unknowns(const Field& f) const {
  Eigen::VectorXd out(n_unknown);
  for (int u = 0; u < n_unknown; ++u) out[u] = f.values[active_of_unknown[u]];
  return out;
}

Field SparseOperator::scatter(const Eigen::VectorXd& u, double inner_value,
                              double outer_value) const {
  Field f(*grid);
  for (int a = 0; a < grid->n_active; ++a) {
    const NodeClass c = grid->node_class[grid->active_nodes[a]];
    if (unknown_of_active[a] >= 0) {
      f.values[a] = u[unknown_of_active[a]];
    } else {
      f.values[a] = (c == NodeClass::InnerBoundary) ? inner_value : outer_value;
    }
  }
  return f;
}

Eigen::VectorXd SparseOperator::apply(const Field& f) const {
  const Eigen::VectorXd fu = restrict_unknowns(f);
  Eigen::VectorXd r = L_uu * fu + L_ub * f.values;
  return r.cwiseQuotient(area);
}

Eigen::VectorXd solve_spd(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                          double tol, int max_iter) {
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>
      cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(max_iter);
  cg.compute(A);
  Eigen::VectorXd x = cg.solve(b);
  const double bn = b.norm();
  double res = bn > 0 ? (A * x - b).norm() / bn : 0.0;
  if (res <= tol) return x;
  if (A.rows() <= 4000) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt{Eigen::MatrixXd(A)};
    x = ldlt.solve(b);
    res = bn > 0 ? (A * x - b).norm() / bn : 0.0;
    if (res <= tol) return x;
  }
  throw SolverError("linear solve did not reach the requested residual", res);
}

Field solve_linear(const SparseOperator& op, const Field& rhs, double tol) {
  if (!(tol > 0.0 && tol <= 1e-6)) {
    throw PreconditionError("solve_linear tolerance must lie in (0, 1e-6]");
  }
  const Eigen::VectorXd b = op.restrict_unknowns(rhs).cwiseProduct(op.area);
  // Area ratios are bounded by 4, tighten the CG target accordingly.
  const Eigen::VectorXd x = solve_spd(op.L_uu, b, tol / 4.0);
  Field out = op.scatter(x);
  const Eigen::VectorXd r = op.apply(out) - op.restrict_unknowns(rhs);
  const double rn = op.restrict_unknowns(rhs).norm();
  if (rn > 0 && r.norm() > tol * rn) {
    throw SolverError("solve_linear residual check failed", r.norm() / rn);
  }
  return out;
}

FaceField gradient(const Grid& grid, const Field& u) {
  if (u.grid == nullptr || !u.grid->same_layout(grid)) {
    throw PreconditionError("gradient: field grid mismatch");
  }
  FaceField g(grid);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i + 1 < grid.nx; ++i) {
      const int a = grid.active_index[grid.idx(i, j)];
      const int b = grid.active_index[grid.idx(i + 1, j)];
      if (a >= 0 && b >= 0) g.fx[g.xi(i, j)] = (u.values[b] - u.values[a]) / grid.hx;
    }
  }
  for (int j = 0; j + 1 < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const int a = grid.active_index[grid.idx(i, j)];
      const int b = grid.active_index[grid.idx(i, j + 1)];
      if (a >= 0 && b >= 0) g.fy[g.yi(i, j)] = (u.values[b] - u.values[a]) / grid.hy;
    }
  }
  return g;
}

Field divergence_flux(const Grid& grid, const Field& m, const FaceField& grad_u) {
  m.require_same_grid(Field(grid));
  Field out(grid);
  auto face_flux_x = [&](int i, int j) -> double {
    const int a = grid.active_index[grid.idx(i, j)];
    const int b = grid.active_index[grid.idx(i + 1, j)];
    if (a < 0 || b < 0) return 0.0;
    return 0.5 * (m.values[a] + m.values[b]) * grad_u.fx[grad_u.xi(i, j)];
  };
  auto face_flux_y = [&](int i, int j) -> double {
    const int a = grid.active_index[grid.idx(i, j)];
    const int b = grid.active_index[grid.idx(i, j + 1)];
    if (a < 0 || b < 0) return 0.0;
    return 0.5 * (m.values[a] + m.values[b]) * grad_u.fy[grad_u.yi(i, j)];
  };
  for (int a = 0; a < grid.n_active; ++a) {
    const int n = grid.active_nodes[a];
    const int i = n % grid.nx, j = n / grid.nx;
    const double wx = grid.hx * ((i > 0 ? 0.5 : 0.0) + (i < grid.nx - 1 ? 0.5 : 0.0));
    double div = 0.0;
    {
      const double right = (i + 1 < grid.nx) ? face_flux_x(i, j) : 0.0;
      const double left = (i > 0) ? face_flux_x(i - 1, j) : 0.0;
      div += (right - left) / wx;
    }
    if (grid.ny > 1) {
      const double wy = grid.hy * ((j > 0 ? 0.5 : 0.0) + (j < grid.ny - 1 ? 0.5 : 0.0));
      const double top = (j + 1 < grid.ny) ? face_flux_y(i, j) : 0.0;
      const double bottom = (j > 0) ? face_flux_y(i, j - 1) : 0.0;
      div += (top - bottom) / wy;
    }
    out.values[a] = div;
  }
  return out;
}

Field grad_dot_at_nodes(const Grid& grid, const FaceField& a, const FaceField& b) {
  Field out(grid);
  for (int k = 0; k < grid.n_active; ++k) {
    const int n = grid.active_nodes[k];
    const int i = n % grid.nx, j = n / grid.nx;
    double ax = 0.0, bx = 0.0, nx_faces = 0.0;
    if (i > 0 && grid.active_index[grid.idx(i - 1, j)] >= 0) {
      ax += a.fx[a.xi(i - 1, j)];
      bx += b.fx[b.xi(i - 1, j)];
      nx_faces += 1.0;
    }
    if (i + 1 < grid.nx && grid.active_index[grid.idx(i + 1, j)] >= 0) {
      ax += a.fx[a.xi(i, j)];
      bx += b.fx[b.xi(i, j)];
      nx_faces += 1.0;
    }
    if (nx_faces > 0) {
      ax /= nx_faces;
      bx /= nx_faces;
    }
    double ay = 0.0, by = 0.0, ny_faces = 0.0;
    if (grid.ny > 1) {
      if (j > 0 && grid.active_index[grid.idx(i, j - 1)] >= 0) {
        ay += a.fy[a.yi(i, j - 1)];
        by += b.fy[b.yi(i, j - 1)];
        ny_faces += 1.0;
      }
      if (j + 1 < grid.ny && grid.active_index[grid.idx(i, j + 1)] >= 0) {
        ay += a.fy[a.yi(i, j)];
        by += b.fy[b.yi(i, j)];
        ny_faces += 1.0;
      }
      if (ny_faces > 0) {
        ay /= ny_faces;
        by /= ny_faces;
      }
    }
    out.values[k] = ax * bx + ay * by;
  }
  return out;
}

Field grad_squared_at_nodes(const Grid& grid, const FaceField& g) {
  return grad_dot_at_nodes(grid, g, g);
}

namespace {

// Inward step direction and spacing for a patch face.
void inward(const Grid& g, Edge e, int& di, int& dj, double& h) {
  switch (e) {
    case Edge::Left: di = 1; dj = 0; h = g.hx; break;
    case Edge::Right: di = -1; dj = 0; h = g.hx; break;
    case Edge::Bottom: di = 0; dj = 1; h = g.hy; break;
    case Edge::Top: di = 0; dj = -1; h = g.hy; break;
  }
}

}  // namespace

std::vector<double> normal_derivative(const Grid& grid, const Field& f,
                                      const BoundaryPatch& patch) {
  std::vector<double> out;
  out.reserve(patch.faces.size());
  for (const auto& face : patch.faces) {
    if (grid.cls(face.i, face.j) != NodeClass::OuterBoundary) {
      throw GeometryError("normal_derivative: patch face not on outer boundary");
    }
    int di, dj;
    double h;
    inward(grid, face.edge, di, dj, h);
    const int a0 = grid.active_index[grid.idx(face.i, face.j)];
    const int a1 = grid.active_index[grid.idx(face.i + di, face.j + dj)];
    const int a2 = grid.active_index[grid.idx(face.i + 2 * di, face.j + 2 * dj)];
    if (a1 < 0 || a2 < 0) throw GeometryError("normal_derivative: stencil hits obstacle");
    out.push_back((3.0 * f.values[a0] - 4.0 * f.values[a1] + f.values[a2]) / (2.0 * h));
  }
  return out;
}

std::vector<double> boundary_trace(const Grid& grid, const Field& f,
                                   const BoundaryPatch& patch) {
  std::vector<double> out;
  out.reserve(patch.faces.size());
  for (const auto& face : patch.faces) {
    out.push_back(f.values[grid.active_index[grid.idx(face.i, face.j)]]);
  }
  return out;
}

}  // namespace mfglab
