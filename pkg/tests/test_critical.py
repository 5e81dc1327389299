from __future__ import annotations

import numpy as np
import pytest

from conftest import CAP, TWO_PHASE, disc_setup
from phasehelfrich.critical import Objective, Problem, discrete_gradient, jacobi_fill, minimize, minimize_two_patch
from phasehelfrich.energy import HelfrichParams, total_energy
from phasehelfrich.errors import NotConverged
from phasehelfrich.scenario import Scenario
from phasehelfrich.surface import ScalarField
from phasehelfrich.testfn import bump, trig_mode
from phasehelfrich.variation import TestFunction, fd_first_variation


def cap_exact(X, Y, R=2.0):
    return np.sqrt(R**2 - X**2 - Y**2)


@pytest.fixture(scope="module")
def cap32():
    return Scenario.from_dict(CAP).with_n(32)


@pytest.fixture(scope="module")
def two_phase32():
    return Scenario.from_dict(TWO_PHASE).with_n(32)


@pytest.mark.parametrize("p", [HelfrichParams(0.5, -0.3, 0.1), HelfrichParams(0.2, 0.2, 0.0, 0.3, -0.2)])
def test_discrete_gradient_matches_finite_differences(p):
    curve, disc = disc_setup(24, radius=0.55)
    f = ScalarField.from_function(disc, lambda X, Y: 0.2 * np.sin(2 * X) * np.cos(3 * Y) + 0.1 * X)
    g = discrete_gradient(f, curve, p)
    rng = np.random.default_rng(1)
    idx = rng.choice(np.flatnonzero(disc.free), 15, replace=False)
    s = 1e-6
    for k in idx:
        e = np.zeros(f.values.size)
        e[k] = s
        up = total_energy(f.with_values(f.values.ravel() + e), curve, p).total
        dn = total_energy(f.with_values(f.values.ravel() - e), curve, p).total
        assert g.ravel()[k] == pytest.approx((up - dn) / (2 * s), rel=1e-5, abs=1e-9)


def test_flat_problem_reaches_zero_energy():
    curve, disc = disc_setup(24, radius=0.55)
    rng = np.random.default_rng(4)
    vals = np.where(disc.free.reshape(disc.grid.shape), 0.05 * rng.standard_normal(disc.grid.shape), 0.0)
    prob = Problem(ScalarField(disc, vals), curve, HelfrichParams(0.0, 0.0, 0.0), max_iters=100)
    fld, rep = minimize(prob)
    assert rep.converged
    assert total_energy(fld, curve, prob.params).total < 1e-10


def test_energy_history_is_monotone(two_phase32):
    _, rep = minimize(two_phase32)
    hist = np.array(rep.energy_history)
    assert rep.converged
    assert np.all(np.diff(hist) < 0)
    assert rep.iterations == len(hist) - 1
    assert rep.final_gradient_norm <= two_phase32.problem().tolerance()


def test_cap_stays_near_exact_solution(cap32):
    fld, rep = minimize(cap32)
    assert rep.converged
    X, Y = fld.grid.coords()
    m = fld.grid.domain_mask
    assert np.max(np.abs(fld.values - cap_exact(X, Y))[m]) < 5e-3


def test_two_patch_agrees_with_single_field_on_cap(cap32):
    single, _ = minimize(cap32)
    f0, f1, rep = minimize_two_patch(cap32)
    assert rep.converged
    assert rep.outer[-1]["jump"] < 1e-6
    X, Y = single.grid.coords()
    m = single.grid.domain_mask
    exact = cap_exact(X, Y)
    for f in (f0, f1):
        assert np.max(np.abs(f.values - exact)[m]) < 5e-3
        assert np.max(np.abs(f.values - single.values)[m]) < 5e-3
    assert "energy" in rep.step_stats


def test_penalty_jump_is_small_after_solve(two_phase32):
    fld, rep = minimize(two_phase32)
    obj = Objective(fld.disc, fld.curve, two_phase32.params, penalty="c1", weight=1.0)
    assert obj.jump(fld.values.ravel()) < 1e-4


def test_strict_mode_raises(two_phase32):
    prob = two_phase32.problem()
    prob.max_iters = 0
    _, rep = minimize(prob)
    assert not rep.converged and rep.iterations == 0
    with pytest.raises(NotConverged):
        minimize(prob, strict=True)


def test_default_tolerance_scales_with_free_nodes(two_phase32):
    prob = two_phase32.problem()
    assert prob.tolerance() == pytest.approx(1e-8 * prob.initial.disc.free.sum())
    prob.tol = 1e-3
    assert prob.tolerance() == 1e-3


def test_jacobi_fill_keeps_boundary_and_smooths(cap32):
    init = cap32.boundary_field()
    filled = jacobi_fill(init, sweeps=50)
    m = init.grid.domain_mask
    assert np.array_equal(filled.values[~m], init.values[~m])
    assert filled.values[m].min() > 0


def test_two_patch_matches_single_field_on_fine_cap():
    sc = Scenario.from_dict(CAP).with_n(128)
    single, _ = minimize(sc)
    f0, f1, rep = minimize_two_patch(sc)
    m = single.grid.domain_mask
    assert rep.converged
    assert np.max(np.abs(f0.values - single.values)[m]) < 1e-5
    assert np.max(np.abs(f1.values - single.values)[m]) < 1e-5


def _normal_derivative_jump(sc) -> float:
    f0, f1, _ = minimize_two_patch(sc)
    curve = f0.curve
    ops = f0.disc.interface(curve)
    j0, j1 = ops.jets(f0.values.ravel(), 0), ops.jets(f1.values.ravel(), 1)
    n = curve.normals
    d0 = j0["x"] * n[:, 0] + j0["y"] * n[:, 1]
    d1 = j1["x"] * n[:, 0] + j1["y"] * n[:, 1]
    return float(np.max(np.abs(d0 - d1)))


def test_two_patch_develops_a_kink(cap32):
    c0 = Scenario.from_dict(dict(TWO_PHASE, solver={"coupling": "C0"})).with_n(32)
    assert _normal_derivative_jump(c0) > 10 * _normal_derivative_jump(cap32)


def test_penalty_trace_is_monotone(two_phase32):
    _, _, rep = minimize_two_patch(two_phase32, target=1e-12, max_outer=6)
    jumps = [o["jump"] for o in rep.outer]
    weights = [o["weight"] for o in rep.outer]
    assert len(jumps) == 6
    assert np.all(np.diff(jumps) < 0)
    assert np.allclose(np.diff(np.log10(weights)), 1.0)


def _random_directions(disc, seed, count=10):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        fn = trig_mode(1.0, *rng.uniform(-3, 3, 2), rng.uniform(0, 6)).times(bump(rng.uniform(-0.3, 0.3, 2), 0.6))
        yield TestFunction.sample(disc, fn)


def test_converged_field_is_critical_for_the_solver_objective(two_phase32):
    prob = two_phase32.problem()
    fld, rep = minimize(prob)
    obj = Objective(fld.disc, prob.curve, prob.params, penalty="c1", weight=prob.coupling)
    u, s = fld.values.ravel(), 1e-5
    for phi in _random_directions(fld.disc, 8):
        p = phi.values.ravel()
        fd = (obj.value(u + s * p)[0] - obj.value(u - s * p)[0]) / (2 * s)
        assert abs(fd) <= 10 * prob.tolerance()


def test_converged_field_is_critical_for_the_energy():
    # the coupling penalty's reaction shrinks with h; at h = 1/64 it is far below tol
    prob = Scenario.from_dict(TWO_PHASE).with_n(64).problem()
    fld, rep = minimize(prob)
    for phi in _random_directions(fld.disc, 8):
        assert abs(fd_first_variation(fld, prob.curve, phi, prob.params, t=1e-5)) <= 10 * prob.tolerance()
