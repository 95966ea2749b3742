#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Sparse>
#include <optional>

#include "mfglab/discretization.hpp"
#include "mfglab/field.hpp"

namespace mfglab {

struct TimeGrid {
  double T = 1.0;
  int nt = 64;

  double dt() const { return T / nt; }
  void validate() const {
    if (nt < 8) throw PreconditionError("time grid needs nt >= 8");
    if (!(T > 0)) throw PreconditionError("final time must be positive");
  }
  bool operator==(const TimeGrid&) const = default;
};

// values(node, level) for levels 0..nt over active nodes.
struct SpaceTimeField {
  const Grid* grid = nullptr;
  TimeGrid tg;
  Eigen::MatrixXd values;  // n_active x (nt+1)

  SpaceTimeField() = default;
  SpaceTimeField(const Grid& g, const TimeGrid& t)
      : grid(&g), tg(t), values(Eigen::MatrixXd::Zero(g.n_active, t.nt + 1)) {}

  Field level(int k) const {
    Field f(*grid);
    f.values = values.col(k);
    return f;
  }
  void set_level(int k, const Field& f) { values.col(k) = f.values; }
  double max_abs() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
  double min_value() const { return values.size() ? values.minCoeff() : 0.0; }

  void require_compatible(const SpaceTimeField& o) const {
    if (!grid || !o.grid || !grid->same_layout(*o.grid) || !(tg == o.tg)) {
      throw PreconditionError("space-time fields live on different grids");
    }
  }
};

// Constant-in-time boundary data: Dirichlet values on the inner and outer
// boundaries, or a flux on the outer boundary when the operator is DN.
struct BoundaryData {
  double inner = 0.0;
  double outer = 0.0;
  double outer_flux = 0.0;
};

// One implicit-Euler step operator (M + dt nu L) with a cached factorization;
// reused across all time levels of a solve.
class HeatStepper {
 public:
  HeatStepper(const Grid& grid, const TimeGrid& tg, double nu, Bc bc,
              const BoundaryData& bdata = {});

  const SparseOperator& op() const { return op_; }
  double dt() const { return dt_; }
  double nu() const { return nu_; }
  const BoundaryData& bdata() const { return bdata_; }

  // Solves (M + dt nu L) x = M prev + dt M source + lift. `source` may be
  // empty; `extra_rhs` is added verbatim (used by the adjoint recursion).
  Eigen::VectorXd step(const Eigen::VectorXd& prev_u, const Eigen::VectorXd* source_u,
                       const Eigen::VectorXd* extra_rhs = nullptr) const;

 private:
  SparseOperator op_;
  double dt_, nu_;
  BoundaryData bdata_;
  Eigen::VectorXd lift_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

// Stepper-reusing variants; the convenience wrappers below build a fresh
// stepper (one factorization) per call.
SpaceTimeField forward_with(const HeatStepper& st, const TimeGrid& tg,
                            const Field& initial, const SpaceTimeField* source);
SpaceTimeField backward_with(const HeatStepper& st, const TimeGrid& tg,
                             const Field& terminal, const SpaceTimeField* source);

SpaceTimeField solve_heat_forward(const Grid& grid, const TimeGrid& tg, double nu,
                                  const Field& initial, const SpaceTimeField* source,
                                  Bc bc, const BoundaryData& bdata = {});

SpaceTimeField solve_backward(const Grid& grid, const TimeGrid& tg, double nu,
                              const Field& terminal, const SpaceTimeField* source,
                              Bc bc, const BoundaryData& bdata = {});

// Boundary weight on Gamma x (0,T]: one value per patch face per time level.
struct WeightFunction {
  BoundaryPatch patch;
  Eigen::MatrixXd values;  // n_faces x (nt+1)

  void validate() const;
};

// Product of a quadratic arclength bump over the patch interior and a
// quadratic bump in time over (0.1 T, 0.9 T).
WeightFunction default_weight(const BoundaryPatch& patch, const TimeGrid& tg);

enum class MeasureRegime : std::uint8_t { Dirichlet, Neumann };

// Discrete adjoint of the backward implicit-Euler solve against the weighted
// boundary flux functional: for any w with w(T)=0 and homogeneous boundary
// data solving -d_t w - nu Lap w = S,
//   sum_k dt <S^k, b^k>_M  =  -nu * flux_functional(w)
// holds to factorization accuracy.
SpaceTimeField adjoint_probe_b(const Grid& grid, const TimeGrid& tg, double nu,
                               const WeightFunction& weight, MeasureRegime regime);

}  // namespace mfglab
