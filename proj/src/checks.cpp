#include "mfglab/checks.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "mfglab/experiment.hpp"

namespace mfglab {

namespace {

constexpr double kNu = 0.2;
const TimeGrid kTg{1.0, 64};
const std::array<double, 2> kDomain{1.0, 1.0};
const std::array<int, 2> kRes{33, 33};

ObstacleSpec center_obstacle() {
  ObstacleSpec o;
  o.shape = ObstacleShape::Rectangle;
  o.center = {0.5, 0.5};
  o.half_extents = {0.125, 0.125};
  return o;
}

std::vector<EdgeSegment> window() { return {{Edge::Right, 0.0, 1.0}}; }

std::vector<BoundaryRegime> all_regimes() {
  return {{RegimeTag::DH, 0.0}, {RegimeTag::NH, 0.0}, {RegimeTag::DI, 1.0},
          {RegimeTag::NI, 1.0}};
}

Field smooth_a(const Grid& g) {
  return make_field(g, [](double x, double y) {
    return 1.0 + 0.5 * std::sin(M_PI * x) * std::sin(M_PI * y);
  });
}

Field smooth_b(const Grid& g) {
  return make_field(g, [](double x, double y) {
    return 0.5 + 0.25 * std::sin(M_PI * x) * std::sin(2.0 * M_PI * y);
  });
}

RunningCost planted_cost(const Grid& g, const BoundaryRegime& regime, int order) {
  RunningCost cost;
  cost.expansion_point = regime.inhomogeneous() ? regime.g0 : 0.0;
  cost.coeffs.emplace_back(g);  // F^(1), zero in class B
  if (!regime.inhomogeneous()) cost.coeffs[0] = smooth_a(g);
  if (order >= 2) cost.coeffs.push_back(regime.inhomogeneous() ? smooth_a(g) : smooth_b(g));
  for (int i = 3; i <= order; ++i) {
    cost.coeffs.push_back(make_field(
        g, [](double x, double) { return 0.25 * (1.0 + x); }));
  }
  return cost;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

Eigen::VectorXd flatten(const SpaceTimeField& u, const SpaceTimeField& m) {
  Eigen::VectorXd out(u.values.size() + m.values.size());
  out.head(u.values.size()) = Eigen::Map<const Eigen::VectorXd>(u.values.data(),
                                                                u.values.size());
  out.tail(m.values.size()) = Eigen::Map<const Eigen::VectorXd>(m.values.data(),
                                                                m.values.size());
  return out;
}

}  // namespace

CheckResult check_green_identity() {
  CheckResult res{"green_identity", false, ""};
  const Grid grid = build_grid(kDomain, kRes, center_obstacle());
  double worst = 0.0;
  for (const auto& regime : all_regimes()) {
    const RunningCost cost = planted_cost(grid, regime, 2);
    const WeightFunction weight = default_weight(make_patch(grid, window()), kTg);
    const SpaceTimeField b =
        adjoint_probe_b(grid, kTg, kNu, weight, regime.measure_regime());
    const std::vector<EigenPair> pairs = eigenpairs(grid, regime.bc(), 4, kNu);
    for (int base = 0; base < 4; base += 2) {
      PerturbationBasis pb;
      pb.directions = {pairs[base].y, pairs[base + 1].y};
      const SolutionTable table =
          linearize_cascade(grid, kTg, kNu, cost, regime, pb);
      for (const auto& [subset, sol] : table) {
        const MomentIdentity mi =
            moment_identity(grid, kTg, kNu, sol.u_source, sol.u, weight,
                            regime.measure_regime(), &b);
        worst = std::max(worst, mi.gap);
      }
    }
  }
  res.pass = worst <= 1e-8;
  res.detail = "max relative gap " + fmt(worst) + " (tol 1e-8)";
  return res;
}

CheckResult check_frechet_consistency() {
  CheckResult res{"frechet_consistency", false, ""};
  const Grid grid = build_grid(kDomain, kRes, ObstacleSpec{});
  const BoundaryRegime regime{RegimeTag::DH, 0.0};
  const RunningCost cost = planted_cost(grid, regime, 3);
  const std::vector<EigenPair> pairs = eigenpairs(grid, regime.bc(), 3, kNu);
  PerturbationBasis pb;
  for (const auto& p : pairs) pb.directions.push_back(p.y);
  const SolutionTable table = linearize_cascade(grid, kTg, kNu, cost, regime, pb);
  const MFGOptions opts{1e-15, 200};
  const std::vector<double> ladder{1e-2, 3e-3, 1e-3};

  bool ok = true;
  std::ostringstream detail;
  for (int order = 1; order <= 3; ++order) {
    MultiIndex subset;
    for (int l = 1; l <= order; ++l) subset.push_back(l);
    const Eigen::VectorXd direct = flatten(table.at(subset).u, table.at(subset).m);
    auto map = [&](const std::vector<double>& amp) {
      Field m0(grid);
      for (size_t l = 0; l < amp.size(); ++l) {
        m0.values += amp[l] * pb.directions[l].values;
      }
      const MFGSolution sol = solve_mfg(grid, kTg, kNu, cost, m0, regime, opts);
      return flatten(sol.u, sol.m);
    };
    std::vector<double> gaps;
    for (double e : ladder) {
      const Eigen::VectorXd quotient =
          frechet_extract(map, std::vector<double>(order, e));
      gaps.push_back((quotient - direct).cwiseAbs().maxCoeff());
    }
    const double slope = std::log(gaps.front() / gaps.back()) /
                         std::log(ladder.front() / ladder.back());
    const bool pass = slope >= 1.9 && gaps.back() <= 1e-5;
    ok = ok && pass;
    detail << "order " << order << ": slope " << fmt(slope) << ", gap(1e-3) "
           << fmt(gaps.back()) << (order < 3 ? "; " : "");
  }
  res.pass = ok;
  res.detail = detail.str() + " (slope >= 1.9, gap <= 1e-5)";
  return res;
}

CheckResult check_wellposed_scaling() {
  CheckResult res{"wellposed_scaling", false, ""};
  const Grid grid = build_grid(kDomain, kRes, ObstacleSpec{});
  const BoundaryRegime regime{RegimeTag::DH, 0.0};
  const RunningCost cost = planted_cost(grid, regime, 2);
  const Field g = make_field(
      grid, [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); });
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  int max_iter = 0;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    Field m0(grid);
    m0.values = eps * g.values;
    const MFGSolution sol = solve_mfg(grid, kTg, kNu, cost, m0, regime);
    const double ratio = (sol.u.max_abs() + sol.m.max_abs()) / eps;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    max_iter = std::max(max_iter, sol.iterations);
  }
  res.pass = hi / lo <= 1.5 && max_iter <= 30;
  res.detail = "response ratio spread " + fmt(hi / lo) + " (<= 1.5), max iterations " +
               std::to_string(max_iter) + " (<= 30)";
  return res;
}

CheckResult check_maximum_principle() {
  CheckResult res{"maximum_principle", false, ""};
  const Grid grid = build_grid(kDomain, kRes, center_obstacle());
  double min_m = 0.0;
  int max_iter = 0;
  for (const auto& regime : all_regimes()) {
    const RunningCost cost = planted_cost(grid, regime, 2);
    Field m0 = make_field(grid, [](double x, double y) {
      return 0.01 * (1.0 + 0.5 * std::sin(M_PI * x) * std::sin(M_PI * y));
    });
    if (regime.inhomogeneous()) m0.values.array() += regime.g0;
    const MFGSolution sol = solve_mfg(grid, kTg, kNu, cost, m0, regime);
    min_m = std::min(min_m, sol.m.min_value());
    max_iter = std::max(max_iter, sol.iterations);
  }
  // First-order density with a strictly positive direction stays positive at
  // interior nodes for t > 0.
  const BoundaryRegime dh{RegimeTag::DH, 0.0};
  const LinearizedSolution lin =
      first_order(grid, kTg, kNu, planted_cost(grid, dh, 2), dh, Field(grid, 1.0));
  double min_interior = std::numeric_limits<double>::infinity();
  for (int a = 0; a < grid.n_active; ++a) {
    if (grid.node_class[grid.active_nodes[a]] != NodeClass::Interior) continue;
    min_interior = std::min(min_interior, lin.m.values.row(a).tail(kTg.nt).minCoeff());
  }
  res.pass = min_m >= -1e-10 && min_interior > 0.0;
  res.detail = "min m " + fmt(min_m) + " (>= -1e-10), min interior m^(1) " +
               fmt(min_interior) + " (> 0)";
  return res;
}

CheckResult check_decoupling() {
  CheckResult res{"inhomogeneous_decoupling", false, ""};
  const Grid grid = build_grid(kDomain, kRes, center_obstacle());
  double worst = 0.0;
  for (const auto& regime : {BoundaryRegime{RegimeTag::DI, 1.0},
                             BoundaryRegime{RegimeTag::NI, 1.0}}) {
    const RunningCost cost = planted_cost(grid, regime, 2);
    const std::vector<EigenPair> pairs = eigenpairs(grid, regime.bc(), 1, kNu);
    const LinearizedSolution lin =
        first_order(grid, kTg, kNu, cost, regime, pairs[0].y);
    worst = std::max(worst, lin.u.max_abs());
  }
  res.pass = worst <= 1e-9;
  res.detail = "max |u^(1)| " + fmt(worst) + " (<= 1e-9)";
  return res;
}

CheckResult check_eigen_quality() {
  CheckResult res{"eigen_quality", false, ""};
  const Grid grid = build_grid(kDomain, kRes, ObstacleSpec{});
  const SparseOperator op = assemble_laplacian(grid, Bc::DD);
  const std::vector<EigenPair> pairs = eigenpairs(grid, Bc::DD, 16, kNu);
  const Eigen::VectorXd areas = cell_areas(grid);
  double max_res = 0.0, max_defect = 0.0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    const double lambda = pairs[i].spatial_eigenvalue(kNu);
    Eigen::VectorXd r = op.apply(pairs[i].y) - lambda * op.restrict_unknowns(pairs[i].y);
    Eigen::VectorXd wr = Eigen::VectorXd::Zero(grid.n_active);
    for (int u = 0; u < op.n_unknown; ++u) wr[op.active_of_unknown[u]] = r[u];
    max_res = std::max(max_res, std::sqrt(wr.cwiseProduct(areas).dot(wr)) /
                                    std::max(lambda, 1.0));
    for (size_t j = 0; j <= i; ++j) {
      const double g = inner_l2(pairs[i].y, pairs[j].y) - (i == j ? 1.0 : 0.0);
      max_defect = std::max(max_defect, std::abs(g));
    }
  }
  const double l1 = pairs[0].spatial_eigenvalue(kNu);
  const double l2 = pairs[1].spatial_eigenvalue(kNu);
  const double e1 = std::abs(l1 - 2.0 * M_PI * M_PI) / (2.0 * M_PI * M_PI);
  const double e2 = std::abs(l2 - 5.0 * M_PI * M_PI) / (5.0 * M_PI * M_PI);
  res.pass = max_res <= 1e-8 && max_defect <= 1e-8 && e1 <= 0.01 && e2 <= 0.01;
  res.detail = "residual " + fmt(max_res) + ", orthonormality defect " + fmt(max_defect) +
               ", eigenvalue errors " + fmt(e1) + "/" + fmt(e2) + " (<= 1%)";
  return res;
}

CheckResult check_obstacle_id() {
  CheckResult res{"obstacle_identification", false, ""};
  CandidateFamily family;
  family.shape = ObstacleShape::Rectangle;
  family.half_extents = {0.125, 0.125};
  for (double cx : {0.25, 0.5, 0.75}) {
    for (double cy : {0.25, 0.5, 0.75}) family.centers.push_back({cx, cy});
  }
  const std::vector<ObstacleSpec> candidates =
      candidate_obstacles(kDomain, kRes, family);
  const ObstacleSpec truth = center_obstacle();
  auto g1 = [](double x, double y) {
    return 1.0 + 0.5 * std::sin(M_PI * x) * std::sin(M_PI * y);
  };
  const Grid grid = build_grid(kDomain, kRes, truth);
  double worst_clean = std::numeric_limits<double>::infinity();
  double worst_noisy = std::numeric_limits<double>::infinity();
  bool ok = candidates.size() >= 8;
  std::string failure;
  for (const auto& regime : all_regimes()) {
    const Field g1f = make_field(grid, g1);
    const SpaceTimeField m1 =
        solve_heat_forward(grid, kTg, kNu, g1f, nullptr, regime.bc());
    const WeightFunction weight = default_weight(make_patch(grid, window()), kTg);
    MeasurementRecord record =
        measure(grid, SpaceTimeField(grid, kTg), m1, weight, regime);
    try {
      const ObstacleVerdict clean = detect_obstacle(record, g1, candidates, regime,
                                                    kNu, kDomain, kRes, window());
      MeasurementRecord noisy = record;
      apply_noise(noisy, 0.01, 7);
      const ObstacleVerdict dirty = detect_obstacle(noisy, g1, candidates, regime,
                                                    kNu, kDomain, kRes, window());
      ok = ok && clean.chosen == truth && clean.margin >= 10.0 &&
           dirty.chosen == truth && dirty.margin >= 2.0;
      worst_clean = std::min(worst_clean, clean.margin);
      worst_noisy = std::min(worst_noisy, dirty.margin);
    } catch (const AmbiguityError& e) {
      ok = false;
      failure = e.what();
    }
  }
  res.pass = ok;
  res.detail = failure.empty()
                   ? "min margins: clean " + fmt(worst_clean) + " (>= 10), noisy " +
                         fmt(worst_noisy) + " (>= 2), " +
                         std::to_string(candidates.size()) + " candidates"
                   : failure;
  return res;
}

CheckResult check_coefficient_recovery() {
  CheckResult res{"coefficient_recovery", false, ""};
  const auto start = std::chrono::steady_clock::now();
  const Grid grid = build_grid(kDomain, kRes, ObstacleSpec{});
  const MFGOptions tight{1e-13, 200};
  std::ostringstream detail;
  bool ok = true;

  {
    const BoundaryRegime regime{RegimeTag::DH, 0.0};
    RunningCost truth = planted_cost(grid, regime, 2);
    truth.coeffs.emplace_back(grid);  // F^(3) = 0
    ProbeContext ctx = default_probes(grid, kTg, kNu, regime, window(), 16, 8);
    DataSource data;
    data.flux = [&](int order) {
      return richardson_flux_data(ctx, truth, order, 1e-3, 3e-3, tight);
    };
    data.flux_coarse = [&](int order) {
      return richardson_flux_data(ctx, truth, order, 3e-3, 9e-3, tight);
    };
    const RecoveryReport report = recover_cost(ctx, 3, data);
    if (!report.ok() || report.stages.size() != 3) {
      ok = false;
      detail << "class A loop failed: " << report.error;
    } else {
      auto rel = [&](int i) {
        Field d(grid);
        d.values = report.stages[i].field.values - truth.coeff(i + 1).values;
        return norm_l2(d) / norm_l2(truth.coeff(i + 1));
      };
      const double e1 = rel(0), e2 = rel(1);
      const double f3 = report.stages[2].field.values.cwiseAbs().maxCoeff();
      const double floor3 = report.noise_floor[2];
      ok = ok && e1 <= 0.05 && e2 <= 0.10 && f3 <= 3.0 * floor3;
      detail << "F1 rel " << fmt(e1) << " (<= 0.05), F2 rel " << fmt(e2)
             << " (<= 0.10), |F3| " << fmt(f3) << " vs 3x floor " << fmt(3.0 * floor3);
    }
  }
  {
    const BoundaryRegime regime{RegimeTag::DI, 1.0};
    const RunningCost truth = planted_cost(grid, regime, 2);
    ProbeContext ctx = default_probes(grid, kTg, kNu, regime, window(), 16, 8);
    DataSource data;
    data.flux = [&](int order) {
      return richardson_flux_data(ctx, truth, order, 1e-3, 3e-3, tight);
    };
    const RecoveryReport report = recover_cost(ctx, 2, data);
    if (!report.ok() || report.stages.empty()) {
      ok = false;
      detail << "; class B loop failed: " << report.error;
    } else {
      Field d(grid);
      d.values = report.stages[0].field.values - truth.coeff(2).values;
      const double e2 = norm_l2(d) / norm_l2(truth.coeff(2));
      ok = ok && e2 <= 0.10;
      detail << "; class B F2 rel " << fmt(e2) << " (<= 0.10)";
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ok = ok && secs <= 600.0;
  res.pass = ok;
  res.detail = detail.str() + "; runtime " + fmt(secs) + "s (<= 600)";
  return res;
}

CheckResult check_distinguishability() {
  CheckResult res{"distinguishability", false, ""};
  const double threshold = 100.0 * 1e-10;
  auto record_for = [&](const ObstacleSpec& obstacle, const BoundaryRegime& regime,
                        int order, double f1_scale, double f2_scale) {
    const Grid grid = build_grid(kDomain, kRes, obstacle);
    RunningCost cost = planted_cost(grid, regime, order);
    if (!regime.inhomogeneous()) cost.coeffs[0].values *= f1_scale;
    if (order >= 2) cost.coeffs[1].values *= f2_scale;
    Field m0 = make_field(grid, [](double x, double y) {
      return 0.05 * (1.0 + 0.5 * std::sin(M_PI * x) * std::sin(M_PI * y));
    });
    if (regime.inhomogeneous()) m0.values.array() += regime.g0;
    const MFGSolution sol = solve_mfg(grid, kTg, kNu, cost, m0, regime);
    const WeightFunction weight = default_weight(make_patch(grid, window()), kTg);
    return measure(grid, sol.u, sol.m, weight, regime);
  };
  ObstacleSpec shifted = center_obstacle();
  shifted.center = {0.71875, 0.5};
  const BoundaryRegime dh{RegimeTag::DH, 0.0};
  const BoundaryRegime ni{RegimeTag::NI, 1.0};
  const double d1 = record_distance(record_for(center_obstacle(), dh, 1, 1.0, 1.0),
                                    record_for(shifted, dh, 1, 1.0, 1.0));
  const double d2 = record_distance(record_for(center_obstacle(), dh, 1, 0.0, 1.0),
                                    record_for(center_obstacle(), dh, 1, 1.0, 1.0));
  const double d3 = record_distance(record_for(center_obstacle(), dh, 2, 1.0, 0.0),
                                    record_for(center_obstacle(), dh, 2, 1.0, 1.0));
  const double d4 = record_distance(record_for(center_obstacle(), ni, 2, 1.0, 0.0),
                                    record_for(center_obstacle(), ni, 2, 1.0, 1.0));
  res.pass = d1 >= threshold && d2 >= threshold && d3 >= threshold && d4 >= threshold;
  res.detail = "pair distances " + fmt(d1) + ", " + fmt(d2) + ", " + fmt(d3) + ", " +
               fmt(d4) + " (>= " + fmt(threshold) + ")";
  return res;
}

CheckResult check_determinism() {
  CheckResult res{"determinism", false, ""};
  const std::string config_text = R"json({
    "resolution": [33, 33],
    "time": {"T": 1.0, "nt": 64},
    "nu": 0.2,
    "regime": "DH",
    "cost": ["1 + 0.5*sin(pi*x)*sin(pi*y)"],
    "obstacle": {"shape": "rectangle", "center": [0.5, 0.5],
                 "half_extents": [0.125, 0.125]},
    "probes": 4,
    "noise_level": 0.01,
    "seed": 42,
    "window": [{"edge": "right", "from": 0.0, "to": 1.0}]
  })json";
  const ExperimentConfig cfg = parse_config(config_text);
  const std::string first = reconstruction_report(cfg, "oracle");
  const std::string second = reconstruction_report(cfg, "oracle");
  res.pass = !first.empty() && first == second;
  res.detail = res.pass ? "two runs byte-identical (" +
                              std::to_string(first.size()) + " bytes)"
                        : "reports differ";
  return res;
}

namespace {

// A check that throws is reported as a failure instead of aborting the run.
CheckResult guarded(const char* name, CheckResult (*fn)()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {name, false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

std::vector<CheckResult> verify_checks() {
  return {guarded("green_identity", check_green_identity),
          guarded("frechet_consistency", check_frechet_consistency),
          guarded("wellposed_scaling", check_wellposed_scaling),
          guarded("maximum_principle", check_maximum_principle),
          guarded("eigen_quality", check_eigen_quality)};
}

std::vector<CheckResult> acceptance_checks() {
  return {guarded("green_identity", check_green_identity),
          guarded("frechet_consistency", check_frechet_consistency),
          guarded("wellposed_scaling", check_wellposed_scaling),
          guarded("maximum_principle", check_maximum_principle),
          guarded("inhomogeneous_decoupling", check_decoupling),
          guarded("eigen_quality", check_eigen_quality),
          guarded("obstacle_identification", check_obstacle_id),
          guarded("coefficient_recovery", check_coefficient_recovery),
          guarded("distinguishability", check_distinguishability),
          guarded("determinism", check_determinism)};
}

}  // namespace mfglab
