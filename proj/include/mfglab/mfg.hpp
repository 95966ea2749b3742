#pragma once

#include "mfglab/parabolic.hpp"

namespace mfglab {

// Truncated power series F(x,m) = sum_i F^(i)(x) (m - e)^i / i! with
// expansion point e = 0 (class A) or e = g0 > 0 (class B, which forces
// F^(1) = 0).
struct RunningCost {
  double expansion_point = 0.0;
  std::vector<Field> coeffs;  // F^(i), i = 1..P

  int order() const { return static_cast<int>(coeffs.size()); }
  bool is_class_b() const { return expansion_point > 0.0; }
  const Field& coeff(int i) const { return coeffs.at(i - 1); }
  void validate() const;
};

RunningCost zero_cost(const Grid& grid, int order, double expansion_point = 0.0);

Field eval_cost(const RunningCost& cost, const Field& m);

enum class RegimeTag : std::uint8_t { DH, NH, DI, NI };

struct BoundaryRegime {
  RegimeTag tag = RegimeTag::DH;
  double g0 = 0.0;

  bool inhomogeneous() const { return tag == RegimeTag::DI || tag == RegimeTag::NI; }
  Bc bc() const {
    return (tag == RegimeTag::DH || tag == RegimeTag::DI) ? Bc::DD : Bc::DN;
  }
  MeasureRegime measure_regime() const {
    return bc() == Bc::DD ? MeasureRegime::Dirichlet : MeasureRegime::Neumann;
  }
  // Boundary data for the density equation; the value function always
  // carries homogeneous data.
  BoundaryData density_bdata() const {
    switch (tag) {
      case RegimeTag::DH: return {0.0, 0.0, 0.0};
      case RegimeTag::NH: return {0.0, 0.0, 0.0};
      case RegimeTag::DI: return {g0, g0, 0.0};
      case RegimeTag::NI: return {g0, 0.0, 0.0};
    }
    return {};
  }
  void validate() const {
    if (inhomogeneous() && !(g0 > 0)) throw ConfigError("DI/NI regimes require g0 > 0");
    if (!inhomogeneous() && g0 != 0.0) throw ConfigError("DH/NH regimes force g0 = 0");
  }
};

struct MFGSolution {
  SpaceTimeField u;  // value function
  SpaceTimeField m;  // density
  int iterations = 0;
  double final_update = 0.0;
};

struct MFGOptions {
  double tol = 1e-10;
  int max_iter = 200;
};

// Picard iteration between the backward HJB solve (quadratic Hamiltonian
// lagged at the previous iterate) and the forward Fokker-Planck solve with
// the drift divergence as a lagged source.
MFGSolution solve_mfg(const Grid& grid, const TimeGrid& tg, double nu,
                      const RunningCost& cost, const Field& m0,
                      const BoundaryRegime& regime, const MFGOptions& opts = {});

// Sup norms of the two discrete equation residuals, recomputed from scratch.
std::pair<double, double> pde_residual(const Grid& grid, const TimeGrid& tg, double nu,
                                       const MFGSolution& sol, const RunningCost& cost,
                                       const BoundaryRegime& regime);

}  // namespace mfglab
