"""End-to-end smoke tests for the python bindings."""

import json
import math

import pytest

import mfglab as M


@pytest.fixture(scope="module")
def grid():
    return M.build_grid([1.0, 1.0], [17, 17])


def test_grid_shape(grid):
    assert grid.nx == 17
    assert grid.n_active == 17 * 17
    assert grid.n_interior == 15 * 15
    assert grid.hx == pytest.approx(1.0 / 16)


def test_obstacle_grid():
    obs = M.ObstacleSpec()
    obs.shape = M.ObstacleShape.RECTANGLE
    obs.center = [0.5, 0.5]
    obs.half_extents = [0.125, 0.125]
    g = M.build_grid([1.0, 1.0], [33, 33], obs)
    assert g.n_active == 33 * 33 - 49


def test_expression_parsing(grid):
    f = M.make_field(grid, "1 + 0.5*sin(pi*x)*sin(pi*y)")
    assert f.values.min() >= 0.5 - 1e-12
    assert f.values.max() <= 1.5 + 1e-12
    with pytest.raises(ValueError):
        M.parse_expression_check("sin(pi*x")


def test_eigenpairs(grid):
    pairs = M.eigenpairs(grid, M.BoundaryRegime(M.RegimeTag.DH), 2, 0.2)
    lam1 = pairs[0].spatial_eigenvalue(0.2)
    assert lam1 == pytest.approx(2 * math.pi**2, rel=5e-3)
    assert pairs[0].mu < pairs[1].mu


def test_heat_solve_decays(grid):
    tg = M.TimeGrid(1.0, 16)
    regime = M.BoundaryRegime(M.RegimeTag.DH)
    init = M.make_field(grid, "sin(pi*x)*sin(pi*y)")
    sol = M.solve_heat(grid, tg, 0.2, init, regime)
    assert sol.values[:, -1].max() < sol.values[:, 0].max()
    assert sol.min_value() >= -1e-12


def test_mfg_zero_data(grid):
    tg = M.TimeGrid(1.0, 16)
    regime = M.BoundaryRegime(M.RegimeTag.DH)
    cost = M.make_cost(grid, 0.0, ["1", "0.5"])
    m0 = M.make_field(grid, "0")
    sol = M.solve_mfg(grid, tg, 0.2, cost, m0, regime)
    assert sol.u.max_abs() <= 1e-14
    assert sol.m.max_abs() <= 1e-14
    assert sol.iterations <= 3


def test_mfg_and_measurement(grid):
    tg = M.TimeGrid(1.0, 16)
    regime = M.BoundaryRegime(M.RegimeTag.DH)
    cost = M.make_cost(grid, 0.0, ["1 + 0.5*sin(pi*x)*sin(pi*y)"])
    m0 = M.make_field(grid, "0.02*sin(pi*x)*sin(pi*y)")
    sol = M.solve_mfg(grid, tg, 0.2, cost, m0, regime)
    assert sol.m.min_value() >= -1e-12
    rec = M.measure(grid, sol.u, sol.m, regime, M.Edge.RIGHT, 0.0, 1.0, tg)
    assert rec.density_series.shape == (17, 17)
    assert math.isfinite(rec.value_channel)


def test_first_order_class_b_decouples():
    obs = M.ObstacleSpec()
    obs.shape = M.ObstacleShape.RECTANGLE
    obs.center = [0.5, 0.5]
    obs.half_extents = [0.125, 0.125]
    g = M.build_grid([1.0, 1.0], [25, 25], obs)
    tg = M.TimeGrid(1.0, 16)
    regime = M.BoundaryRegime(M.RegimeTag.DI, 1.0)
    cost = M.make_cost(g, 1.0, ["0", "1"])
    direction = M.make_field(g, "sin(pi*x)*sin(pi*y)")
    sol = M.first_order(g, tg, 0.2, cost, regime, direction)
    assert abs(sol.u.values).max() <= 1e-12


def test_reconstruction_report_deterministic():
    config = json.dumps(
        {
            "resolution": [17, 17],
            "time": {"T": 1.0, "nt": 16},
            "nu": 0.2,
            "regime": "DH",
            "cost": ["1 + 0.5*sin(pi*x)*sin(pi*y)"],
            "probes": 4,
            "seed": 11,
            "window": [{"edge": "right", "from": 0.0, "to": 1.0}],
        }
    )
    first = M.reconstruction_report(config, "oracle")
    second = M.reconstruction_report(config, "oracle")
    assert first == second
    report = json.loads(first)
    assert report["provenance"]["operation"] == "reconstruct"
    assert "stages" in report


def test_verify_checks_shape():
    # Just the API surface; the full gate runs in the C++ acceptance binary.
    assert hasattr(M, "verify_checks")
