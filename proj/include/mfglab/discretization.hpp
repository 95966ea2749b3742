#pragma once

#include <Eigen/Sparse>

#include "mfglab/field.hpp"
#include "mfglab/geometry.hpp"

namespace mfglab {

// Boundary-condition regime of the spatial operator: Dirichlet on the inner
// boundary always; DD adds Dirichlet on the outer boundary, DN makes the
// outer boundary Neumann (outer nodes become unknowns).
enum class Bc : std::uint8_t { DD, DN };

// -Laplacian in vertex-centered finite-volume form. The stiffness matrix L
// is symmetric over unknown nodes; the full operator is M^{-1} (L_uu f_u +
// L_ub f_dirichlet) with M the lumped cell areas, so the action reduces to
// the classic 5-point stencil at interior nodes.
struct SparseOperator {
  const Grid* grid = nullptr;
  Bc bc = Bc::DD;

  std::vector<int> unknown_of_active;  // active -> unknown index, -1 if Dirichlet
  std::vector<int> active_of_unknown;
  int n_unknown = 0;

  Eigen::SparseMatrix<double> L_uu;        // stiffness over unknowns
  Eigen::SparseMatrix<double> L_ub;        // coupling of unknowns to Dirichlet actives
  Eigen::VectorXd area;                    // lumped cell areas per unknown
  Eigen::VectorXd boundary_measure;        // outer-boundary face length per unknown (DN)

  bool is_dirichlet(int active) const { return unknown_of_active[active] < 0; }

  Eigen::VectorXd restrict_unknowns(const Field& f) const;
  // Scatter unknown values into a Field, filling Dirichlet entries with
  // the supplied boundary values (inner, outer).
  Field scatter(const Eigen::VectorXd& u, double inner_value = 0.0,
                double outer_value = 0.0) const;

  // (-Delta_h f) restricted to unknown rows; uses Dirichlet entries of f.
  Eigen::VectorXd apply(const Field& f) const;
};

SparseOperator assemble_laplacian(const Grid& grid, Bc bc);

// Solves op x = rhs (i.e. L x = M rhs) to a relative residual <= tol.
// Dirichlet entries of the result are zero.
Field solve_linear(const SparseOperator& op, const Field& rhs, double tol = 1e-10);

// Generic SPD sparse solve used by solve_linear and the eigensolver:
// conjugate gradient with diagonal preconditioning, dense Cholesky fallback
// for systems of up to 4000 unknowns.
Eigen::VectorXd solve_spd(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                          double tol, int max_iter = 10000);

FaceField gradient(const Grid& grid, const Field& u);

Field divergence_flux(const Grid& grid, const Field& m, const FaceField& grad_u);

// grad a . grad b sampled back at nodes (face averages; one-sided at
// boundaries).
Field grad_dot_at_nodes(const Grid& grid, const FaceField& a, const FaceField& b);

// |grad u|^2 sampled back at nodes.
Field grad_squared_at_nodes(const Grid& grid, const FaceField& g);

// Outward normal derivative on the faces of an outer-boundary patch,
// 3-point one-sided stencil.
std::vector<double> normal_derivative(const Grid& grid, const Field& f,
                                      const BoundaryPatch& patch);

// Values of f on the patch faces.
std::vector<double> boundary_trace(const Grid& grid, const Field& f,
                                   const BoundaryPatch& patch);

}  // namespace mfglab
