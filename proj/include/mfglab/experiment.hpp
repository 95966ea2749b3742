#pragma once

#include "mfglab/reconstruct.hpp"

namespace mfglab {

// One experiment described by a single JSON config file.
struct ExperimentConfig {
  std::array<double, 2> domain{1.0, 1.0};
  std::array<int, 2> resolution{33, 33};
  ObstacleSpec obstacle;
  TimeGrid time{1.0, 64};
  double nu = 0.2;
  BoundaryRegime regime{RegimeTag::DH, 0.0};
  std::vector<std::string> cost_exprs;  // F^(i)(x,y), i = 1..P
  std::string m0_expr = "0";
  std::string g1_expr = "1";  // obstacle probe, must be positive
  int probe_count = 16;
  int basis_count = -1;  // recovery basis size; -1 = probe_count / 2 (conditioning)
  std::vector<double> eps_ladder{1e-2, 3e-3, 1e-3};
  std::vector<EdgeSegment> window{{Edge::Right, 0.0, 1.0}};
  CandidateFamily candidates;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  double noise_level = 0.0;
  MFGOptions picard;

  std::uint64_t config_hash = 0;  // FNV-1a of the raw config text

  int max_order() const { return static_cast<int>(cost_exprs.size()); }
  int effective_basis() const {
    return basis_count >= 0 ? basis_count : (probe_count > 2 ? probe_count / 2 : 1);
  }
  void validate() const;
  RunningCost make_cost(const Grid& grid) const;
  Field make_m0(const Grid& grid) const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::uint64_t fnv1a(const std::string& text);

void write_field_csv(const std::string& path, const Grid& grid, const Field& f);

// Subcommand bodies.  Each writes artifacts under out_dir and returns a short
// human-readable summary; configuration problems raise ConfigError, solver
// problems SolverError/DivergenceError.  The CLI maps those to exit codes.
std::string run_forward(const ExperimentConfig& cfg, const std::string& out_dir);
std::string run_linearize(const ExperimentConfig& cfg, const std::string& out_dir);
std::string run_measure(const ExperimentConfig& cfg, const std::string& out_dir);

// Full closed loop: synthesize measurements from the planted truth, detect
// the obstacle, then recover the cost blind to the truth except through
// measurements.  mode is "oracle" or "measurement".  The returned string is
// the exact report written to disk (used by the determinism check).
std::string reconstruction_report(const ExperimentConfig& cfg, const std::string& mode);
std::string run_reconstruct(const ExperimentConfig& cfg, const std::string& mode,
                            const std::string& out_dir);

}  // namespace mfglab
