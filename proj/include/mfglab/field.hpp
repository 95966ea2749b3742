#pragma once

#include <Eigen/Dense>
#include <functional>

#include "mfglab/errors.hpp"
#include "mfglab/geometry.hpp"

namespace mfglab {

// Scalar values on the active nodes of a grid.
struct Field {
  const Grid* grid = nullptr;
  Eigen::VectorXd values;  // size grid->n_active

  Field() = default;
  explicit Field(const Grid& g) : grid(&g), values(Eigen::VectorXd::Zero(g.n_active)) {}
  Field(const Grid& g, double c) : grid(&g), values(Eigen::VectorXd::Constant(g.n_active, c)) {}

  double& at(int i, int j) { return values[grid->active_index[grid->idx(i, j)]]; }
  double at(int i, int j) const { return values[grid->active_index[grid->idx(i, j)]]; }

  void require_same_grid(const Field& other) const {
    if (grid == nullptr || other.grid == nullptr || !grid->same_layout(*other.grid)) {
      throw PreconditionError("fields live on different grids");
    }
  }
};

inline Field make_field(const Grid& g, const std::function<double(double, double)>& f) {
  Field out(g);
  for (int a = 0; a < g.n_active; ++a) {
    const int n = g.active_nodes[a];
    out.values[a] = f(g.x(n % g.nx), g.y(n / g.nx));
  }
  return out;
}

// Cell areas of the vertex-centered finite-volume tessellation; the discrete
// L2 pairing over active nodes is <f,g> = sum_a area_a f_a g_a.
Eigen::VectorXd cell_areas(const Grid& g);

inline double inner_l2(const Field& a, const Field& b) {
  a.require_same_grid(b);
  return (cell_areas(*a.grid).array() * a.values.array() * b.values.array()).sum();
}

inline double norm_l2(const Field& a) { return std::sqrt(inner_l2(a, a)); }

// Scalar field per lattice face; x-faces sit between (i,j) and (i+1,j).
struct FaceField {
  const Grid* grid = nullptr;
  Eigen::VectorXd fx;  // size (nx-1)*ny, index j*(nx-1)+i
  Eigen::VectorXd fy;  // size nx*(ny-1), index j*nx+i

  explicit FaceField(const Grid& g)
      : grid(&g),
        fx(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.nx - 1) * g.ny)),
        fy(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.nx) * std::max(g.ny - 1, 0))) {}

  int xi(int i, int j) const { return j * (grid->nx - 1) + i; }
  int yi(int i, int j) const { return j * grid->nx + i; }
};

}  // namespace mfglab
