from __future__ import annotations

import json

import numpy as np
import pytest

from conftest import TWO_PHASE
from phasehelfrich.errors import ScenarioError
from phasehelfrich.scenario import Expression, Scenario, load_scenario

SCEN = __import__("pathlib").Path(__file__).resolve().parents[1] / "scenarios"


@pytest.mark.parametrize("path", sorted(p for p in SCEN.glob("*.json") if p.stem != "missing_sigma"))
def test_shipped_scenarios_load(path):
    sc = load_scenario(path)
    assert sc.h > 0
    prob = sc.problem()
    assert np.isfinite(prob.initial.values).all()


def test_missing_sigma_names_field_and_line():
    with pytest.raises(ScenarioError) as exc:
        load_scenario(SCEN / "missing_sigma.json")
    msg = str(exc.value)
    assert "sigma" in msg and msg.startswith("line ")


def test_invalid_json_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "name": "x",\n  oops\n}\n')
    with pytest.raises(ScenarioError, match="line 3"):
        Scenario.load(p)


def test_missing_file_reported(tmp_path):
    with pytest.raises(ScenarioError):
        Scenario.load(tmp_path / "nope.json")
    d = dict(TWO_PHASE, initial_field={"csv": "absent.csv"})
    p = tmp_path / "s.json"
    p.write_text(json.dumps(d))
    with pytest.raises(ScenarioError, match="not found"):
        Scenario.load(p)


@pytest.mark.parametrize(
    "patch",
    [
        {"grid": {"h": -0.1}},
        {"domain": {"type": "hexagon"}},
        {"curve": {"type": "circle"}},
        {"params": {"h0_phase0": 0, "h0_phase1": 0, "sigma": "big"}},
        {"boundary_data": "import_os(x)"},
    ],
)
def test_bad_scenarios_rejected(patch):
    with pytest.raises(ScenarioError):
        Scenario.from_dict(dict(TWO_PHASE, **patch)).problem()


def test_expression_evaluator():
    e = Expression("sqrt(4 - x^2 - y**2) + sin(pi*x)*exp(y) - cos(e)")
    x, y = np.array([0.3]), np.array([-0.2])
    expect = np.sqrt(4 - 0.09 - 0.04) + np.sin(np.pi * 0.3) * np.exp(-0.2) - np.cos(np.e)
    assert e(x, y)[0] == pytest.approx(expect)
    for bad in ("__import__('os')", "x.real", "lambda: 1", "abs(x)", "[1, 2]", "x if y else 1"):
        with pytest.raises(ScenarioError):
            Expression(bad)


def test_orientation_puts_interior_on_side_zero():
    for orient, inner_side in (("outward", 0), ("inward", 1)):
        sc = Scenario.from_dict(dict(TWO_PHASE, curve={"type": "circle", "radius": 0.6, "orientation": orient}))
        lay = sc.discretization().layout
        g = sc.discretization().grid
        i = np.argmin(np.abs(g.x))
        j = np.argmin(np.abs(g.y))
        assert lay.side[i, j] == inner_side


def test_with_n_and_with_h():
    sc = Scenario.from_dict(TWO_PHASE)
    assert sc.with_n(32).h == pytest.approx(1 / 32)
    assert sc.with_h(0.05).h == pytest.approx(0.05)
    assert sc.h == pytest.approx(1 / 64)
    assert sc.params.sigma == 0.1


def test_boundary_data_applied_outside_domain():
    sc = Scenario.from_dict(dict(TWO_PHASE, boundary_data="1 + x"))
    bf = sc.boundary_field()
    g = bf.grid
    X, _ = g.coords()
    ext = ~g.domain_mask
    assert np.allclose(bf.values[ext], 1 + X[ext])
