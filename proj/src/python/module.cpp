#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mfglab/checks.hpp"
#include "mfglab/experiment.hpp"
#include "mfglab/expr.hpp"

namespace py = pybind11;
using namespace mfglab;

PYBIND11_MODULE(_mfglab, m) {
  m.doc() = "mean-field-game forward and inverse toolkit";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<AmbiguityError>(m, "AmbiguityError", PyExc_RuntimeError);

  py::enum_<ObstacleShape>(m, "ObstacleShape")
      .value("NONE", ObstacleShape::None)
      .value("RECTANGLE", ObstacleShape::Rectangle)
      .value("DISK", ObstacleShape::Disk);

  py::class_<ObstacleSpec>(m, "ObstacleSpec")
      .def(py::init<>())
      .def_readwrite("shape", &ObstacleSpec::shape)
      .def_readwrite("center", &ObstacleSpec::center)
      .def_readwrite("half_extents", &ObstacleSpec::half_extents)
      .def_readwrite("radius", &ObstacleSpec::radius);

  py::class_<Grid>(m, "Grid")
      .def_readonly("nx", &Grid::nx)
      .def_readonly("ny", &Grid::ny)
      .def_readonly("hx", &Grid::hx)
      .def_readonly("hy", &Grid::hy)
      .def_readonly("n_active", &Grid::n_active)
      .def_readonly("n_interior", &Grid::n_interior);

  m.def("build_grid", &build_grid, py::arg("domain_size"), py::arg("resolution"),
        py::arg("obstacle") = ObstacleSpec{});

  py::class_<Field>(m, "Field")
      .def_property_readonly("values",
                             [](const Field& f) { return f.values; });

  m.def(
      "make_field",
      [](const Grid& g, const std::string& expr) {
        return make_field(g, parse_expression(expr));
      },
      py::keep_alive<0, 1>(), py::arg("grid"), py::arg("expression"));

  py::class_<TimeGrid>(m, "TimeGrid")
      .def(py::init([](double T, int nt) { return TimeGrid{T, nt}; }),
           py::arg("T") = 1.0, py::arg("nt") = 64)
      .def_readwrite("T", &TimeGrid::T)
      .def_readwrite("nt", &TimeGrid::nt);

  py::class_<SpaceTimeField>(m, "SpaceTimeField")
      .def_property_readonly("values",
                             [](const SpaceTimeField& f) { return f.values; })
      .def("max_abs", &SpaceTimeField::max_abs)
      .def("min_value", &SpaceTimeField::min_value);

  py::enum_<RegimeTag>(m, "RegimeTag")
      .value("DH", RegimeTag::DH)
      .value("NH", RegimeTag::NH)
      .value("DI", RegimeTag::DI)
      .value("NI", RegimeTag::NI);

  py::class_<BoundaryRegime>(m, "BoundaryRegime")
      .def(py::init([](RegimeTag tag, double g0) {
             return BoundaryRegime{tag, g0};
           }),
           py::arg("tag"), py::arg("g0") = 0.0)
      .def_readwrite("tag", &BoundaryRegime::tag)
      .def_readwrite("g0", &BoundaryRegime::g0);

  py::class_<RunningCost>(m, "RunningCost")
      .def_readonly("expansion_point", &RunningCost::expansion_point)
      .def("order", &RunningCost::order);

  m.def(
      "make_cost",
      [](const Grid& g, double expansion_point,
         const std::vector<std::string>& exprs) {
        RunningCost cost;
        cost.expansion_point = expansion_point;
        for (const auto& e : exprs) cost.coeffs.push_back(make_field(g, parse_expression(e)));
        cost.validate();
        return cost;
      },
      py::keep_alive<0, 1>(), py::arg("grid"), py::arg("expansion_point"),
      py::arg("coefficients"));

  py::class_<MFGSolution>(m, "MFGSolution")
      .def_readonly("u", &MFGSolution::u)
      .def_readonly("m", &MFGSolution::m)
      .def_readonly("iterations", &MFGSolution::iterations)
      .def_readonly("final_update", &MFGSolution::final_update);

  m.def(
      "solve_mfg",
      [](const Grid& grid, const TimeGrid& tg, double nu, const RunningCost& cost,
         const Field& m0, const BoundaryRegime& regime, double tol, int max_iter) {
        return solve_mfg(grid, tg, nu, cost, m0, regime, MFGOptions{tol, max_iter});
      },
      py::keep_alive<0, 1>(), py::arg("grid"), py::arg("time_grid"), py::arg("nu"),
      py::arg("cost"), py::arg("m0"), py::arg("regime"), py::arg("tol") = 1e-10,
      py::arg("max_iter") = 200);

  m.def(
      "solve_heat",
      [](const Grid& grid, const TimeGrid& tg, double nu, const Field& initial,
         const BoundaryRegime& regime) {
        return solve_heat_forward(grid, tg, nu, initial, nullptr, regime.bc(),
                                  regime.density_bdata());
      },
      py::keep_alive<0, 1>(), py::arg("grid"), py::arg("time_grid"), py::arg("nu"),
      py::arg("initial"), py::arg("regime"));

  py::class_<EigenPair>(m, "EigenPair")
      .def_readonly("mu", &EigenPair::mu)
      .def_readonly("y", &EigenPair::y)
      .def("spatial_eigenvalue", &EigenPair::spatial_eigenvalue);

  m.def(
      "eigenpairs",
      [](const Grid& grid, const BoundaryRegime& regime, int count, double nu) {
        return eigenpairs(grid, regime.bc(), count, nu);
      },
      py::arg("grid"), py::arg("regime"), py::arg("count"),
      py::arg("nu"));

  py::class_<LinearizedSolution>(m, "LinearizedSolution")
      .def_readonly("subset", &LinearizedSolution::subset)
      .def_readonly("u", &LinearizedSolution::u)
      .def_readonly("m", &LinearizedSolution::m);

  m.def(
      "first_order",
      [](const Grid& grid, const TimeGrid& tg, double nu, const RunningCost& cost,
         const BoundaryRegime& regime, const Field& g) {
        return first_order(grid, tg, nu, cost, regime, g);
      },
      py::keep_alive<0, 1>(), py::arg("grid"), py::arg("time_grid"), py::arg("nu"),
      py::arg("cost"), py::arg("regime"), py::arg("g"));

  py::class_<MeasurementRecord>(m, "MeasurementRecord")
      .def_readonly("value_channel", &MeasurementRecord::value_channel)
      .def_property_readonly(
          "density_series",
          [](const MeasurementRecord& r) { return r.density_series; });

  m.def(
      "measure",
      [](const Grid& grid, const SpaceTimeField& u, const SpaceTimeField& m,
         const BoundaryRegime& regime, Edge edge, double from, double to,
         const TimeGrid& tg) {
        const WeightFunction w =
            default_weight(make_patch(grid, {{edge, from, to}}), tg);
        return measure(grid, u, m, w, regime);
      },
      py::arg("grid"), py::arg("u"), py::arg("m"), py::arg("regime"), py::arg("edge"),
      py::arg("from_"), py::arg("to"), py::arg("time_grid"));

  py::enum_<Edge>(m, "Edge")
      .value("LEFT", Edge::Left)
      .value("RIGHT", Edge::Right)
      .value("BOTTOM", Edge::Bottom)
      .value("TOP", Edge::Top);

  m.def("parse_expression_check",
        [](const std::string& text) { parse_expression(text); });

  m.def("reconstruction_report",
        [](const std::string& config_text, const std::string& mode) {
          return reconstruction_report(parse_config(config_text), mode);
        },
        py::arg("config_json"), py::arg("mode") = "oracle");

  py::class_<CheckResult>(m, "CheckResult")
      .def_readonly("name", &CheckResult::name)
      .def_readonly("pass_", &CheckResult::pass)
      .def_readonly("detail", &CheckResult::detail);

  m.def("verify_checks", &verify_checks);
}
