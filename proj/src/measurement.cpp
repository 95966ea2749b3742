#include "mfglab/measurement.hpp"

#include <fstream>
#include <json.hpp>
#include <optional>
#include <random>

#include "mfglab/linearize.hpp"

namespace mfglab {

namespace {

const char* edge_name(Edge e) {
  switch (e) {
    case Edge::Left: return "left";
    case Edge::Right: return "right";
    case Edge::Bottom: return "bottom";
    case Edge::Top: return "top";
  }
  return "?";
}

Edge edge_from(const std::string& s) {
  if (s == "left") return Edge::Left;
  if (s == "right") return Edge::Right;
  if (s == "bottom") return Edge::Bottom;
  if (s == "top") return Edge::Top;
  throw ConfigError("unknown edge name: " + s);
}

const char* regime_name(RegimeTag t) {
  switch (t) {
    case RegimeTag::DH: return "DH";
    case RegimeTag::NH: return "NH";
    case RegimeTag::DI: return "DI";
    case RegimeTag::NI: return "NI";
  }
  return "?";
}

RegimeTag regime_from(const std::string& s) {
  if (s == "DH") return RegimeTag::DH;
  if (s == "NH") return RegimeTag::NH;
  if (s == "DI") return RegimeTag::DI;
  if (s == "NI") return RegimeTag::NI;
  throw ConfigError("unknown regime name: " + s);
}

std::vector<double> channel_values(const Grid& grid, const Field& f,
                                   const BoundaryPatch& patch, MeasureRegime regime) {
  return regime == MeasureRegime::Dirichlet ? normal_derivative(grid, f, patch)
                                            : boundary_trace(grid, f, patch);
}

}  // namespace

double flux_functional(const Grid& grid, const SpaceTimeField& f,
                       const WeightFunction& weight, MeasureRegime regime) {
  weight.validate();
  const int nf = static_cast<int>(weight.patch.faces.size());
  if (weight.values.rows() != nf || weight.values.cols() != f.tg.nt + 1) {
    throw PreconditionError("weight shape does not match the field layout");
  }
  double acc = 0.0;
  const double dt = f.tg.dt();
  for (int k = 0; k < f.tg.nt; ++k) {
    const std::vector<double> q = channel_values(grid, f.level(k), weight.patch, regime);
    for (int i = 0; i < nf; ++i) {
      acc += dt * weight.values(i, k) * weight.patch.faces[i].length * q[i];
    }
  }
  return acc;
}

MeasurementRecord measure(const Grid& grid, const SpaceTimeField& u,
                          const SpaceTimeField& m, const WeightFunction& weight,
                          const BoundaryRegime& regime) {
  regime.validate();
  u.require_compatible(m);
  MeasurementRecord rec;
  rec.tag = regime.tag;
  rec.tg = u.tg;
  rec.patch = weight.patch;
  rec.value_channel = flux_functional(grid, u, weight, regime.measure_regime());
  const int nf = static_cast<int>(weight.patch.faces.size());
  rec.density_series = Eigen::MatrixXd::Zero(nf, u.tg.nt + 1);
  for (int k = 0; k <= u.tg.nt; ++k) {
    const std::vector<double> q =
        channel_values(grid, m.level(k), weight.patch, regime.measure_regime());
    for (int i = 0; i < nf; ++i) rec.density_series(i, k) = q[i];
  }
  return rec;
}

void apply_noise(MeasurementRecord& rec, double level, std::uint64_t seed) {
  if (level < 0) throw PreconditionError("noise level must be nonnegative");
  if (level == 0) return;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xi(-1.0, 1.0);
  rec.value_channel *= 1.0 + level * xi(rng);
  for (Eigen::Index j = 0; j < rec.density_series.cols(); ++j) {
    for (Eigen::Index i = 0; i < rec.density_series.rows(); ++i) {
      rec.density_series(i, j) *= 1.0 + level * xi(rng);
    }
  }
}

double record_distance(const MeasurementRecord& a, const MeasurementRecord& b) {
  if (a.density_series.rows() != b.density_series.rows() ||
      a.density_series.cols() != b.density_series.cols()) {
    throw PreconditionError("measurement records have different layouts");
  }
  const double dv = std::abs(a.value_channel - b.value_channel);
  const double dm = (a.density_series - b.density_series).cwiseAbs().maxCoeff();
  return std::max(dv, dm);
}

double probe_pairing(const Grid& grid, const SpaceTimeField& source,
                     const SpaceTimeField& b) {
  source.require_compatible(b);
  const Eigen::VectorXd areas = cell_areas(grid);
  double acc = 0.0;
  const double dt = source.tg.dt();
  for (int k = 0; k < source.tg.nt; ++k) {
    acc += dt * source.values.col(k).cwiseProduct(areas).dot(b.values.col(k));
  }
  return acc;
}

MomentIdentity moment_identity(const Grid& grid, const TimeGrid& tg, double nu,
                               const SpaceTimeField& source, const SpaceTimeField& w,
                               const WeightFunction& weight, MeasureRegime regime,
                               const SpaceTimeField* b_precomputed) {
  SpaceTimeField b_local;
  const SpaceTimeField* b = b_precomputed;
  if (!b) {
    b_local = adjoint_probe_b(grid, tg, nu, weight, regime);
    b = &b_local;
  }
  MomentIdentity out;
  out.interior = probe_pairing(grid, source, *b);
  out.boundary = -nu * flux_functional(grid, w, weight, regime);
  const double scale = std::max({std::abs(out.interior), std::abs(out.boundary), 1e-14});
  out.gap = std::abs(out.interior - out.boundary) / scale;
  return out;
}

MeasurementRecord linearized_measurement(
    const std::function<MeasurementRecord(const std::vector<double>&)>& pipeline,
    const std::vector<double>& eps) {
  std::optional<MeasurementRecord> layout;
  auto flat = [&](const std::vector<double>& amplitudes) {
    MeasurementRecord r = pipeline(amplitudes);
    if (!layout) layout = r;
    Eigen::VectorXd v(1 + r.density_series.size());
    v[0] = r.value_channel;
    v.tail(r.density_series.size()) =
        Eigen::Map<const Eigen::VectorXd>(r.density_series.data(), r.density_series.size());
    return v;
  };
  const Eigen::VectorXd d = frechet_extract(flat, eps);
  MeasurementRecord out = *layout;
  out.value_channel = d[0];
  Eigen::Map<Eigen::VectorXd>(out.density_series.data(), out.density_series.size()) =
      d.tail(out.density_series.size());
  return out;
}

void save_record(const MeasurementRecord& rec, const std::string& path) {
  nlohmann::json j;
  j["regime"] = regime_name(rec.tag);
  j["T"] = rec.tg.T;
  j["nt"] = rec.tg.nt;
  j["value_channel"] = rec.value_channel;
  nlohmann::json faces = nlohmann::json::array();
  for (const auto& f : rec.patch.faces) {
    faces.push_back({{"i", f.i}, {"j", f.j}, {"edge", edge_name(f.edge)},
                     {"length", f.length}, {"arclength", f.arclength}});
  }
  j["faces"] = faces;
  nlohmann::json series = nlohmann::json::array();
  for (Eigen::Index i = 0; i < rec.density_series.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < rec.density_series.cols(); ++k) {
      row.push_back(rec.density_series(i, k));
    }
    series.push_back(row);
  }
  j["density_series"] = series;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << "\n";
}

MeasurementRecord load_record(const Grid& grid, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed record file: ") + e.what());
  }
  MeasurementRecord rec;
  try {
    rec.tag = regime_from(j.at("regime").get<std::string>());
    rec.tg.T = j.at("T").get<double>();
    rec.tg.nt = j.at("nt").get<int>();
    rec.value_channel = j.at("value_channel").get<double>();
    for (const auto& jf : j.at("faces")) {
      BoundaryPatch::Face f;
      f.i = jf.at("i").get<int>();
      f.j = jf.at("j").get<int>();
      f.edge = edge_from(jf.at("edge").get<std::string>());
      f.length = jf.at("length").get<double>();
      f.arclength = jf.at("arclength").get<double>();
      if (f.i < 0 || f.i >= grid.nx || f.j < 0 || f.j >= grid.ny) {
        throw ConfigError("record face outside the grid");
      }
      rec.patch.faces.push_back(f);
      rec.patch.total_length += f.length;
    }
    const auto& series = j.at("density_series");
    const int nf = static_cast<int>(rec.patch.faces.size());
    rec.density_series = Eigen::MatrixXd::Zero(nf, rec.tg.nt + 1);
    if (static_cast<int>(series.size()) != nf) {
      throw ConfigError("record density series has the wrong number of rows");
    }
    for (int i = 0; i < nf; ++i) {
      if (static_cast<int>(series[i].size()) != rec.tg.nt + 1) {
        throw ConfigError("record density series has the wrong number of levels");
      }
      for (int k = 0; k <= rec.tg.nt; ++k) {
        rec.density_series(i, k) = series[i][k].get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed record file: ") + e.what());
  }
  rec.tg.validate();
  return rec;
}

}  // namespace mfglab
