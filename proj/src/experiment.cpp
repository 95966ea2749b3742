#include "mfglab/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "mfglab/expr.hpp"

namespace mfglab {

namespace {

using nlohmann::json;

RegimeTag regime_from(const std::string& s) {
  if (s == "DH") return RegimeTag::DH;
  if (s == "NH") return RegimeTag::NH;
  if (s == "DI") return RegimeTag::DI;
  if (s == "NI") return RegimeTag::NI;
  throw ConfigError("unknown regime \"" + s + "\" (expected DH, NH, DI or NI)");
}

Edge edge_from(const std::string& s) {
  if (s == "left") return Edge::Left;
  if (s == "right") return Edge::Right;
  if (s == "bottom") return Edge::Bottom;
  if (s == "top") return Edge::Top;
  throw ConfigError("unknown edge \"" + s + "\"");
}

ObstacleShape shape_from(const std::string& s) {
  if (s == "none") return ObstacleShape::None;
  if (s == "rectangle") return ObstacleShape::Rectangle;
  if (s == "disk") return ObstacleShape::Disk;
  throw ConfigError("unknown obstacle shape \"" + s + "\"");
}

ObstacleSpec obstacle_from(const json& j) {
  ObstacleSpec o;
  o.shape = shape_from(j.value("shape", std::string("none")));
  if (j.contains("center")) {
    o.center = {j["center"].at(0).get<double>(), j["center"].at(1).get<double>()};
  }
  if (j.contains("half_extents")) {
    o.half_extents = {j["half_extents"].at(0).get<double>(),
                      j["half_extents"].at(1).get<double>()};
  }
  o.radius = j.value("radius", 0.0);
  return o;
}

json obstacle_to_json(const ObstacleSpec& o) {
  const char* shape = o.shape == ObstacleShape::None
                          ? "none"
                          : (o.shape == ObstacleShape::Rectangle ? "rectangle" : "disk");
  return json{{"shape", shape},
              {"center", {o.center[0], o.center[1]}},
              {"half_extents", {o.half_extents[0], o.half_extents[1]}},
              {"radius", o.radius}};
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

json manifest_skeleton(const ExperimentConfig& cfg, const std::string& operation) {
  return json{{"provenance", {{"operation", operation}}},
              {"config_hash", hash_hex(cfg.config_hash)},
              {"seed", cfg.seed}};
}

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void ExperimentConfig::validate() const {
  regime.validate();
  time.validate();
  if (!(nu > 0)) throw ConfigError("nu must be positive");
  if (cost_exprs.empty()) throw ConfigError("at least one cost coefficient is required");
  if (probe_count < 1) throw ConfigError("probe count must be >= 1");
  if (basis_count > probe_count) {
    throw ConfigError("basis count must not exceed the probe count");
  }
  if (eps_ladder.empty()) throw ConfigError("eps ladder must not be empty");
  for (double e : eps_ladder) {
    if (!(e > 0)) throw ConfigError("eps ladder entries must be positive");
  }
  for (size_t i = 1; i < eps_ladder.size(); ++i) {
    if (!(eps_ladder[i] < eps_ladder[i - 1])) {
      throw ConfigError("eps ladder must be strictly decreasing");
    }
  }
  if (noise_level < 0) throw ConfigError("noise level must be nonnegative");
  if (window.empty()) throw ConfigError("measurement window must not be empty");
  if (regime.inhomogeneous()) {
    // class B: the first coefficient must be the literal zero expression or
    // evaluate to zero; checked for real once fields are instantiated.
  }
}

RunningCost ExperimentConfig::make_cost(const Grid& grid) const {
  RunningCost cost;
  cost.expansion_point = regime.inhomogeneous() ? regime.g0 : 0.0;
  for (const auto& text : cost_exprs) {
    cost.coeffs.push_back(make_field(grid, parse_expression(text)));
  }
  cost.validate();
  return cost;
}

Field ExperimentConfig::make_m0(const Grid& grid) const {
  return make_field(grid, parse_expression(m0_expr));
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.config_hash = fnv1a(text);
  try {
    if (j.contains("domain")) {
      cfg.domain = {j["domain"].at(0).get<double>(), j["domain"].at(1).get<double>()};
    }
    if (j.contains("resolution")) {
      cfg.resolution = {j["resolution"].at(0).get<int>(),
                        j["resolution"].at(1).get<int>()};
    }
    if (j.contains("obstacle")) cfg.obstacle = obstacle_from(j["obstacle"]);
    if (j.contains("time")) {
      cfg.time.T = j["time"].value("T", 1.0);
      cfg.time.nt = j["time"].value("nt", 64);
    }
    cfg.nu = j.value("nu", 0.2);
    cfg.regime.tag = regime_from(j.value("regime", std::string("DH")));
    cfg.regime.g0 = j.value("g0", 0.0);
    if (j.contains("cost")) {
      for (const auto& e : j["cost"]) cfg.cost_exprs.push_back(e.get<std::string>());
    } else {
      cfg.cost_exprs = {"0"};
    }
    cfg.m0_expr = j.value("m0", std::string("0"));
    cfg.g1_expr = j.value("g1", std::string("1"));
    cfg.probe_count = j.value("probes", 16);
    cfg.basis_count = j.value("basis", -1);
    if (j.contains("eps_ladder")) {
      cfg.eps_ladder.clear();
      for (const auto& e : j["eps_ladder"]) cfg.eps_ladder.push_back(e.get<double>());
    }
    if (j.contains("window")) {
      cfg.window.clear();
      for (const auto& w : j["window"]) {
        cfg.window.push_back({edge_from(w.at("edge").get<std::string>()),
                              w.value("from", 0.0), w.value("to", 1.0)});
      }
    }
    if (j.contains("candidates")) {
      const auto& c = j["candidates"];
      cfg.candidates.shape = shape_from(c.value("shape", std::string("rectangle")));
      if (c.contains("half_extents")) {
        cfg.candidates.half_extents = {c["half_extents"].at(0).get<double>(),
                                       c["half_extents"].at(1).get<double>()};
      }
      cfg.candidates.radius = c.value("radius", 0.125);
      for (const auto& p : c.at("centers")) {
        cfg.candidates.centers.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      }
    } else {
      cfg.candidates.shape = ObstacleShape::Rectangle;
      cfg.candidates.half_extents = {0.125, 0.125};
      for (double cx : {0.25, 0.5, 0.75}) {
        for (double cy : {0.25, 0.5, 0.75}) {
          cfg.candidates.centers.push_back({cx, cy});
        }
      }
    }
    cfg.output_dir = j.value("output_dir", std::string("out"));
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.noise_level = j.value("noise_level", 0.0);
    if (j.contains("picard")) {
      cfg.picard.tol = j["picard"].value("tol", 1e-10);
      cfg.picard.max_iter = j["picard"].value("max_iter", 200);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void write_field_csv(const std::string& path, const Grid& grid, const Field& f) {
  std::ostringstream os;
  os << "x,y,value\n" << std::setprecision(17);
  for (int a = 0; a < grid.n_active; ++a) {
    const int n = grid.active_nodes[a];
    os << grid.x(n % grid.nx) << "," << grid.y(n / grid.nx) << "," << f.values[a]
       << "\n";
  }
  write_text(path, os.str());
}

std::string run_forward(const ExperimentConfig& cfg, const std::string& out_dir) {
  const Grid grid = build_grid(cfg.domain, cfg.resolution, cfg.obstacle);
  const RunningCost cost = cfg.make_cost(grid);
  const Field m0 = cfg.make_m0(grid);
  const MFGSolution sol =
      solve_mfg(grid, cfg.time, cfg.nu, cost, m0, cfg.regime, cfg.picard);
  const auto [r_hjb, r_fp] = pde_residual(grid, cfg.time, cfg.nu, sol, cost, cfg.regime);

  json man = manifest_skeleton(cfg, "solve_mfg");
  man["iterations"] = sol.iterations;
  man["final_update"] = sol.final_update;
  man["residual_hjb"] = r_hjb;
  man["residual_fp"] = r_fp;
  man["u_sup"] = sol.u.max_abs();
  man["m_min"] = sol.m.min_value();
  man["m_sup"] = sol.m.max_abs();
  write_text(out_dir + "/forward.json", man.dump(2) + "\n");
  write_field_csv(out_dir + "/u_initial.csv", grid, sol.u.level(0));
  write_field_csv(out_dir + "/m_final.csv", grid, sol.m.level(cfg.time.nt));

  std::ostringstream os;
  os << "converged in " << sol.iterations << " iterations, residuals (" << r_hjb << ", "
     << r_fp << ")";
  return os.str();
}

std::string run_linearize(const ExperimentConfig& cfg, const std::string& out_dir) {
  const Grid grid = build_grid(cfg.domain, cfg.resolution, cfg.obstacle);
  const RunningCost cost = cfg.make_cost(grid);
  const int n = std::min(cfg.probe_count, 2);
  const std::vector<EigenPair> pairs = eigenpairs(grid, cfg.regime.bc(), n, cfg.nu);
  PerturbationBasis basis;
  for (const auto& p : pairs) basis.directions.push_back(p.y);
  const SolutionTable table =
      linearize_cascade(grid, cfg.time, cfg.nu, cost, cfg.regime, basis);

  json man = manifest_skeleton(cfg, "linearize_cascade");
  json orders = json::array();
  for (const auto& [subset, sol] : table) {
    orders.push_back({{"subset", subset},
                      {"u_sup", sol.u.max_abs()},
                      {"m_sup", sol.m.max_abs()}});
  }
  man["orders"] = orders;
  write_text(out_dir + "/linearize.json", man.dump(2) + "\n");
  write_field_csv(out_dir + "/m1_final.csv", grid,
                  table.at({1}).m.level(cfg.time.nt));
  std::ostringstream os;
  os << table.size() << " linearized systems solved";
  return os.str();
}

std::string run_measure(const ExperimentConfig& cfg, const std::string& out_dir) {
  const Grid grid = build_grid(cfg.domain, cfg.resolution, cfg.obstacle);
  const RunningCost cost = cfg.make_cost(grid);
  const Field m0 = cfg.make_m0(grid);
  const MFGSolution sol =
      solve_mfg(grid, cfg.time, cfg.nu, cost, m0, cfg.regime, cfg.picard);
  const WeightFunction weight = default_weight(make_patch(grid, cfg.window), cfg.time);
  MeasurementRecord rec = measure(grid, sol.u, sol.m, weight, cfg.regime);
  apply_noise(rec, cfg.noise_level, cfg.seed);
  std::filesystem::create_directories(out_dir);
  save_record(rec, out_dir + "/record.json");

  json man = manifest_skeleton(cfg, "measure");
  man["value_channel"] = rec.value_channel;
  man["noise_level"] = cfg.noise_level;
  write_text(out_dir + "/measure.json", man.dump(2) + "\n");
  std::ostringstream os;
  os << "value channel " << rec.value_channel;
  return os.str();
}

std::string reconstruction_report(const ExperimentConfig& cfg, const std::string& mode) {
  if (mode != "oracle" && mode != "measurement") {
    throw ConfigError("mode must be \"oracle\" or \"measurement\"");
  }
  json rep = manifest_skeleton(cfg, "reconstruct");
  rep["mode"] = mode;

  // Synthesis side: sees the planted truth.
  const Grid truth_grid = build_grid(cfg.domain, cfg.resolution, cfg.obstacle);
  const ScalarExpr g1fn = parse_expression(cfg.g1_expr);
  const Field g1 = make_field(truth_grid, g1fn);
  const SpaceTimeField m1 =
      solve_heat_forward(truth_grid, cfg.time, cfg.nu, g1, nullptr, cfg.regime.bc());
  const WeightFunction truth_weight =
      default_weight(make_patch(truth_grid, cfg.window), cfg.time);
  MeasurementRecord record = measure(truth_grid, SpaceTimeField(truth_grid, cfg.time),
                                     m1, truth_weight, cfg.regime);
  apply_noise(record, cfg.noise_level, cfg.seed);

  try {
    ObstacleSpec chosen;  // no obstacle: nothing to detect
    if (!cfg.obstacle.empty()) {
      const std::vector<ObstacleSpec> candidates =
          candidate_obstacles(cfg.domain, cfg.resolution, cfg.candidates);
      const ObstacleVerdict verdict =
          detect_obstacle(record, g1fn, candidates, cfg.regime, cfg.nu, cfg.domain,
                          cfg.resolution, cfg.window);
      chosen = verdict.chosen;
      json vj;
      vj["chosen_index"] = verdict.chosen_index;
      vj["chosen"] = obstacle_to_json(verdict.chosen);
      vj["margin"] = verdict.margin;
      vj["residuals"] = verdict.residuals;
      rep["obstacle"] = vj;
    } else {
      rep["obstacle"] = {{"chosen", obstacle_to_json(chosen)},
                         {"chosen_index", -1},
                         {"margin", nullptr},
                         {"residuals", json::array()}};
    }

    const Grid grid = build_grid(cfg.domain, cfg.resolution, chosen);
    ProbeContext ctx =
        default_probes(grid, cfg.time, cfg.nu, cfg.regime, cfg.window,
                       cfg.probe_count, cfg.effective_basis());
    const RunningCost truth = cfg.make_cost(grid);

    DataSource data;
    if (mode == "oracle") {
      data.flux = [&](int order) { return oracle_flux_data(ctx, truth, order); };
    } else {
      // Ladder entries are sorted descending; the two smallest rungs feed a
      // Richardson-extrapolated primary datum, the next pair the noise-floor
      // comparison chain.
      const size_t n = cfg.eps_ladder.size();
      const double fine = cfg.eps_ladder[n - 1];
      if (n >= 2) {
        const double mid = cfg.eps_ladder[n - 2];
        data.flux = [&, fine, mid](int order) {
          return richardson_flux_data(ctx, truth, order, fine, mid, cfg.picard);
        };
        if (n >= 3) {
          const double top = cfg.eps_ladder[n - 3];
          data.flux_coarse = [&, mid, top](int order) {
            return richardson_flux_data(ctx, truth, order, mid, top, cfg.picard);
          };
        } else {
          data.flux_coarse = [&, fine](int order) {
            return quotient_flux_data(ctx, truth, order, fine, cfg.picard);
          };
        }
      } else {
        data.flux = [&, fine](int order) {
          return quotient_flux_data(ctx, truth, order, fine, cfg.picard);
        };
      }
    }

    const RecoveryReport rec = recover_cost(ctx, cfg.max_order(), data);
    rep["probe_gap"] = ctx.probe_gap;
    rep["error"] = rec.error;
    json stages = json::array();
    for (size_t s = 0; s < rec.stages.size(); ++s) {
      const CoefficientEstimate& est = rec.stages[s];
      const Field& true_f = truth.coeff(est.order);
      Field diff(grid);
      diff.values = est.field.values - true_f.values;
      const double true_norm = norm_l2(true_f);
      json sj;
      sj["order"] = est.order;
      sj["residual"] = est.residual;
      sj["condition"] = est.condition;
      sj["lambda"] = est.lambda;
      sj["rank_warning"] = est.rank_warning;
      sj["noise_floor"] = rec.noise_floor[s];
      sj["sup_error"] = diff.values.cwiseAbs().maxCoeff();
      sj["recovered_sup"] = est.field.values.cwiseAbs().maxCoeff();
      sj["relative_l2_error"] =
          true_norm > 0 ? norm_l2(diff) / true_norm : norm_l2(diff);
      std::vector<double> coeffs(est.coefficients.data(),
                                 est.coefficients.data() + est.coefficients.size());
      sj["coefficients"] = coeffs;
      stages.push_back(sj);
    }
    rep["stages"] = stages;
  } catch (const AmbiguityError& e) {
    rep["error"] = std::string("ambiguous obstacle: ") + e.what();
  }
  return rep.dump(2) + "\n";
}

std::string run_reconstruct(const ExperimentConfig& cfg, const std::string& mode,
                            const std::string& out_dir) {
  const std::string report = reconstruction_report(cfg, mode);
  write_text(out_dir + "/report_" + mode + ".json", report);

  // Recovered-vs-true CSV grids for plotting.
  const json rep = json::parse(report);
  if (rep.contains("obstacle")) {
    const ObstacleSpec chosen = obstacle_from(rep["obstacle"]["chosen"]);
    const Grid grid = build_grid(cfg.domain, cfg.resolution, chosen);
    const RunningCost truth = cfg.make_cost(grid);
    if (rep.contains("stages")) {
      ProbeContext ctx =
          default_probes(grid, cfg.time, cfg.nu, cfg.regime, cfg.window,
                       cfg.probe_count, cfg.effective_basis());
      for (const auto& sj : rep["stages"]) {
        const int order = sj["order"].get<int>();
        Field recovered(grid);
        const auto& coeffs = sj["coefficients"];
        for (size_t j = 0; j < coeffs.size(); ++j) {
          recovered.values += coeffs[j].get<double>() * ctx.basis[j].values;
        }
        write_field_csv(out_dir + "/recovered_F" + std::to_string(order) + ".csv", grid,
                        recovered);
        write_field_csv(out_dir + "/true_F" + std::to_string(order) + ".csv", grid,
                        truth.coeff(order));
      }
    }
  }
  const std::string err = rep.value("error", std::string());
  if (!err.empty()) throw ValidationError("reconstruction incomplete: " + err);
  std::ostringstream os;
  os << "report written to " << out_dir << "/report_" << mode << ".json";
  return os.str();
}

}  // namespace mfglab
