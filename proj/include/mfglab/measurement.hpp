#pragma once

#include <functional>
#include <string>

#include "mfglab/mfg.hpp"

namespace mfglab {

// Weighted space-time boundary functional sum_{k<nt} dt sum_f w(f,k) len(f)
// q(f,k), where q is the outward normal derivative of `f` (Dirichlet
// measurement) or its trace (Neumann measurement).
double flux_functional(const Grid& grid, const SpaceTimeField& f,
                       const WeightFunction& weight, MeasureRegime regime);

// One observation through the partial-boundary window: the weighted value
// channel is scalar, the density channel keeps the full trace/flux series on
// the window faces.
struct MeasurementRecord {
  RegimeTag tag = RegimeTag::DH;
  TimeGrid tg;
  BoundaryPatch patch;
  double value_channel = 0.0;
  Eigen::MatrixXd density_series;  // n_faces x (nt+1)
};

MeasurementRecord measure(const Grid& grid, const SpaceTimeField& u,
                          const SpaceTimeField& m, const WeightFunction& weight,
                          const BoundaryRegime& regime);

// Multiplicative noise (1 + level * xi), xi uniform on [-1, 1], applied to
// both channels with a fixed seed.
void apply_noise(MeasurementRecord& rec, double level, std::uint64_t seed);

// Sup distance across both channels; the records must share a layout.
double record_distance(const MeasurementRecord& a, const MeasurementRecord& b);

// Interior/boundary pairing of the adjoint probe: for w solving the backward
// source problem with source S,
//   interior = sum_k dt <S^k, b^k>_M,   boundary = -nu * flux_functional(w),
// and gap is their relative difference.
struct MomentIdentity {
  double interior = 0.0;
  double boundary = 0.0;
  double gap = 0.0;
};

MomentIdentity moment_identity(const Grid& grid, const TimeGrid& tg, double nu,
                               const SpaceTimeField& source, const SpaceTimeField& w,
                               const WeightFunction& weight, MeasureRegime regime,
                               const SpaceTimeField* b_precomputed = nullptr);

// M-weighted pairing sum_k dt <S^k, b^k> over levels 0..nt-1.
double probe_pairing(const Grid& grid, const SpaceTimeField& source,
                     const SpaceTimeField& b);

// Mixed difference-quotient derivative of a full measurement pipeline,
// applied componentwise to both channels.  The reconstruction consumes only
// this path when running in measurement-driven mode.
MeasurementRecord linearized_measurement(
    const std::function<MeasurementRecord(const std::vector<double>&)>& pipeline,
    const std::vector<double>& eps);

void save_record(const MeasurementRecord& rec, const std::string& path);
MeasurementRecord load_record(const Grid& grid, const std::string& path);

}  // namespace mfglab
