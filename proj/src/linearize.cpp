#include "mfglab/linearize.hpp"

#include <algorithm>
#include <sstream>

namespace mfglab {

namespace {

void check_subset(const MultiIndex& s) {
  if (s.empty() || s.size() > 4) {
    throw PreconditionError("multi-index must have 1 to 4 labels");
  }
  if (!std::is_sorted(s.begin(), s.end()) ||
      std::adjacent_find(s.begin(), s.end()) != s.end() || s.front() < 1) {
    throw PreconditionError("multi-index labels must be sorted, distinct and >= 1");
  }
}

const LinearizedSolution& lookup(const SolutionTable& table, const MultiIndex& key) {
  auto it = table.find(key);
  if (it == table.end()) {
    std::ostringstream os;
    os << "missing lower-order solution for subset {";
    for (size_t i = 0; i < key.size(); ++i) os << (i ? "," : "") << key[i];
    os << "}";
    throw PreconditionError(os.str());
  }
  return it->second;
}

MultiIndex from_mask(const MultiIndex& s, unsigned mask) {
  MultiIndex out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (mask & (1u << i)) out.push_back(s[i]);
  }
  return out;
}

// All set partitions of s (15 at most for |s| = 4).
std::vector<std::vector<MultiIndex>> set_partitions(const MultiIndex& s) {
  std::vector<std::vector<MultiIndex>> out;
  std::function<void(size_t, std::vector<MultiIndex>&)> rec =
      [&](size_t pos, std::vector<MultiIndex>& parts) {
        if (pos == s.size()) {
          out.push_back(parts);
          return;
        }
        // Index loop: the recursive call below grows `parts`, which would
        // invalidate range-for iterators.
        for (size_t b = 0; b < parts.size(); ++b) {
          parts[b].push_back(s[pos]);
          rec(pos + 1, parts);
          parts[b].pop_back();
        }
        parts.push_back({s[pos]});
        rec(pos + 1, parts);
        parts.pop_back();
      };
  std::vector<MultiIndex> parts;
  rec(0, parts);
  return out;
}

// Core solve for one subset; m_initial is the direction field for singleton
// subsets and null (zero initial data) otherwise.
LinearizedSolution solve_subset(const Grid& grid, const TimeGrid& tg, double nu,
                                const RunningCost& cost, const BoundaryRegime& regime,
                                const SolutionTable& lower, const MultiIndex& subset,
                                const Field* m_initial) {
  check_subset(subset);
  cost.validate();
  regime.validate();
  if (cost.is_class_b() != regime.inhomogeneous()) {
    throw ConfigError("running-cost class does not match the boundary regime");
  }
  const int n = static_cast<int>(subset.size());
  const unsigned full = (1u << n) - 1;
  const Bc bc = regime.bc();

  // Proper nonempty sub-splits, needed by both equations.
  struct Split {
    const LinearizedSolution* a;
    const LinearizedSolution* b;
  };
  std::vector<Split> splits;  // unordered pairs {A, S\A}
  for (unsigned mask = 1; mask < full; ++mask) {
    const unsigned comp = full & ~mask;
    if (mask > comp) continue;
    splits.push_back({&lookup(lower, from_mask(subset, mask)),
                      &lookup(lower, from_mask(subset, comp))});
  }

  const auto partitions = set_partitions(subset);

  HeatStepper u_stepper(grid, tg, nu, bc);  // homogeneous data either way
  HeatStepper m_stepper(grid, tg, nu, bc);

  // Running-cost source for the u equation: sum over set partitions pi of
  // F^(|pi|) prod_B m^(B).  The one-block partition needs m^(S) itself, so
  // it is folded in only when that field is already known (class A order).
  auto cost_source = [&](const SpaceTimeField* m_self) {
    SpaceTimeField src(grid, tg);
    for (const auto& pi : partitions) {
      const int blocks = static_cast<int>(pi.size());
      if (blocks > cost.order()) continue;
      if (blocks == 1 && !m_self) continue;  // class B: F^(1) = 0
      for (int k = 0; k <= tg.nt; ++k) {
        Eigen::VectorXd prod = cost.coeff(blocks).values;
        for (const auto& block : pi) {
          const Eigen::VectorXd& mb = (blocks == 1)
                                          ? m_self->values.col(k)
                                          : lookup(lower, block).m.values.col(k);
          prod = prod.cwiseProduct(mb);
        }
        src.values.col(k) += prod;
      }
    }
    return src;
  };

  auto quad_source = [&]() {
    SpaceTimeField src(grid, tg);
    for (const auto& sp : splits) {
      for (int k = 0; k <= tg.nt; ++k) {
        const FaceField ga = gradient(grid, sp.a->u.level(k));
        const FaceField gb = gradient(grid, sp.b->u.level(k));
        src.values.col(k) -= grad_dot_at_nodes(grid, ga, gb).values;
      }
    }
    return src;
  };

  auto drift_source = [&](const SpaceTimeField* u_self) {
    SpaceTimeField src(grid, tg);
    for (const auto& sp : splits) {
      for (int k = 0; k <= tg.nt; ++k) {
        src.values.col(k) +=
            divergence_flux(grid, sp.a->m.level(k), gradient(grid, sp.b->u.level(k)))
                .values;
        src.values.col(k) +=
            divergence_flux(grid, sp.b->m.level(k), gradient(grid, sp.a->u.level(k)))
                .values;
      }
    }
    if (u_self && cost.is_class_b()) {
      Field m_bg(grid);
      m_bg.values.setConstant(regime.g0);
      for (int k = 0; k <= tg.nt; ++k) {
        src.values.col(k) +=
            divergence_flux(grid, m_bg, gradient(grid, u_self->level(k))).values;
      }
    }
    return src;
  };

  LinearizedSolution out;
  out.subset = subset;
  Field zero(grid);
  const Field& init = m_initial ? *m_initial : zero;

  if (cost.is_class_b()) {
    // u first: its source never needs m^(S).
    SpaceTimeField u_src = cost_source(nullptr);
    u_src.values += quad_source().values;
    out.u = backward_with(u_stepper, tg, zero, &u_src);
    SpaceTimeField m_src = drift_source(&out.u);
    out.m = forward_with(m_stepper, tg, init, &m_src);
    out.u_source = std::move(u_src);
  } else {
    SpaceTimeField m_src = drift_source(nullptr);
    out.m = forward_with(m_stepper, tg, init, &m_src);
    SpaceTimeField u_src = cost_source(&out.m);
    u_src.values += quad_source().values;
    out.u = backward_with(u_stepper, tg, zero, &u_src);
    out.u_source = std::move(u_src);
  }
  return out;
}

}  // namespace

void PerturbationBasis::validate(const Grid& grid) const {
  if (directions.empty() || directions.size() > 4) {
    throw PreconditionError("perturbation basis needs 1 to 4 directions");
  }
  for (const auto& g : directions) {
    if (!g.grid || !g.grid->same_layout(grid)) {
      throw PreconditionError("perturbation direction lives on the wrong grid");
    }
    if (g.values.cwiseAbs().maxCoeff() == 0.0) {
      throw PreconditionError("perturbation direction is identically zero");
    }
  }
}

LinearizedSolution first_order(const Grid& grid, const TimeGrid& tg, double nu,
                               const RunningCost& cost, const BoundaryRegime& regime,
                               const Field& g, int label) {
  return solve_subset(grid, tg, nu, cost, regime, {}, {label}, &g);
}

LinearizedSolution second_order(const Grid& grid, const TimeGrid& tg, double nu,
                                const RunningCost& cost, const BoundaryRegime& regime,
                                const LinearizedSolution& a, const LinearizedSolution& b) {
  if (a.subset.size() != 1 || b.subset.size() != 1 || a.subset == b.subset) {
    throw PreconditionError("second order needs two distinct first-order solutions");
  }
  SolutionTable lower;
  lower[a.subset] = a;
  lower[b.subset] = b;
  MultiIndex s{a.subset[0], b.subset[0]};
  std::sort(s.begin(), s.end());
  return nth_order(grid, tg, nu, cost, regime, lower, s);
}

LinearizedSolution nth_order(const Grid& grid, const TimeGrid& tg, double nu,
                             const RunningCost& cost, const BoundaryRegime& regime,
                             const SolutionTable& lower, const MultiIndex& subset) {
  if (subset.size() < 2) {
    throw PreconditionError("nth_order handles subsets of size >= 2; use first_order");
  }
  return solve_subset(grid, tg, nu, cost, regime, lower, subset, nullptr);
}

SolutionTable linearize_cascade(const Grid& grid, const TimeGrid& tg, double nu,
                                const RunningCost& cost, const BoundaryRegime& regime,
                                const PerturbationBasis& basis) {
  basis.validate(grid);
  const int n = basis.size();
  SolutionTable table;
  std::vector<MultiIndex> subsets;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    MultiIndex s;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) s.push_back(i + 1);
    }
    subsets.push_back(std::move(s));
  }
  std::sort(subsets.begin(), subsets.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  for (const auto& s : subsets) {
    if (s.size() == 1) {
      table[s] = first_order(grid, tg, nu, cost, regime, basis.direction(s[0]), s[0]);
    } else {
      table[s] = nth_order(grid, tg, nu, cost, regime, table, s);
    }
  }
  return table;
}

Eigen::VectorXd frechet_extract(
    const std::function<Eigen::VectorXd(const std::vector<double>&)>& map,
    const std::vector<double>& eps) {
  const int n = static_cast<int>(eps.size());
  if (n < 1 || n > 4) throw PreconditionError("frechet_extract supports orders 1 to 4");
  double scale = 1.0;
  for (double e : eps) {
    if (!(e > 0)) throw PreconditionError("frechet steps must be positive");
    scale *= 2.0 * e;
  }
  Eigen::VectorXd acc;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<double> point(eps);
    int sign = 1;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        point[i] = -point[i];
        sign = -sign;
      }
    }
    Eigen::VectorXd val;
    try {
      val = map(point);
    } catch (const DivergenceError& e) {
      std::ostringstream os;
      os << e.what() << " at lattice amplitudes (";
      for (int i = 0; i < n; ++i) os << (i ? "," : "") << point[i];
      os << ")";
      throw DivergenceError(os.str());
    }
    if (acc.size() == 0) {
      acc = Eigen::VectorXd::Zero(val.size());
    } else if (val.size() != acc.size()) {
      throw PreconditionError("map output dimension changed across the stencil");
    }
    acc += sign * val;
  }
  return acc / scale;
}

}  // namespace mfglab
