from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import disc_setup
from phasehelfrich.energy import HelfrichParams
from phasehelfrich.errors import PhiNotZeroOnE, StepTooSmall
from phasehelfrich.surface import ScalarField, graph_mean_curvature
from phasehelfrich.testfn import bump, build_phi, constant, partition_of_unity, trig_mode
from phasehelfrich.variation import (
    C1_PHI,
    TestFunction,
    boundary_functional,
    delta_H,
    delta_H_terms,
    fd_first_variation,
    first_variation,
)

KEYS = ("x", "y", "xx", "xy", "yy")


@pytest.fixture(scope="module")
def setup():
    return disc_setup(32, radius=0.6)


def surface_fn(X, Y):
    return 0.3 * np.sin(2 * X + 0.5) * np.cos(1.5 * Y) + 0.2 * X * Y


def smooth_phi(disc):
    fn = trig_mode(1.0, 1.7, -0.9, 0.4).times(bump((0.1, 0.05), 0.85))
    return TestFunction.sample(disc, fn)


@given(st.lists(st.floats(-2, 2), min_size=5, max_size=5), st.lists(st.floats(-2, 2), min_size=5, max_size=5))
def test_delta_H_matches_curvature_difference(u, p):
    uj, pj = dict(zip(KEYS, u)), dict(zip(KEYS, p))
    s = 1e-6
    Hp, _ = graph_mean_curvature(*(uj[k] + s * pj[k] for k in KEYS))
    Hm, _ = graph_mean_curvature(*(uj[k] - s * pj[k] for k in KEYS))
    assert delta_H_terms(uj, pj) == pytest.approx((Hp - Hm) / (2 * s), rel=1e-6, abs=1e-6)


def test_delta_H_at_node(setup):
    _, disc = setup
    f = ScalarField.from_function(disc, surface_fn)
    phi = smooth_phi(disc)
    from phasehelfrich.surface import mean_curvature

    node = (disc.grid.nx // 2 + 3, disc.grid.ny // 2 - 2)
    s = 1e-6
    fd = (mean_curvature(f.with_values(f.values + s * phi.values), node, 0)
          - mean_curvature(f.with_values(f.values - s * phi.values), node, 0)) / (2 * s)
    assert delta_H(f, phi, node, 0) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("p", [HelfrichParams(0.5, -0.3, 0.1), HelfrichParams(0.0, 1.0, 0.0, 0.2, -0.4)])
def test_first_variation_matches_finite_differences(setup, p):
    curve, disc = setup
    f = ScalarField.from_function(disc, surface_fn)
    phi = smooth_phi(disc)
    an = first_variation(f, curve, phi, p)
    fd = fd_first_variation(f, curve, phi, p, t=1e-5, richardson=True)
    assert an == pytest.approx(fd, rel=1e-6)


def test_first_variation_is_linear(setup):
    curve, disc = setup
    f = ScalarField.from_function(disc, surface_fn)
    p = HelfrichParams(0.5, -0.3, 0.1, 0.05, 0.1)
    a, b = smooth_phi(disc), TestFunction.sample(disc, bump((-0.2, 0.3), 0.5))
    lhs = first_variation(f, curve, 2.0 * a + (-0.5) * b, p)
    rhs = 2.0 * first_variation(f, curve, a, p) - 0.5 * first_variation(f, curve, b, p)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_fd_rejects_bad_step(setup):
    curve, disc = setup
    f = ScalarField.from_function(disc, surface_fn)
    with pytest.raises(ValueError):
        fd_first_variation(f, curve, smooth_phi(disc), HelfrichParams(), t=0.0)
    with pytest.raises(StepTooSmall):
        fd_first_variation(f, curve, smooth_phi(disc), HelfrichParams(0.5, -0.3, 0.1), t=1.0)


def test_boundary_functional_flat_surface(setup):
    curve, disc = setup
    f = ScalarField(disc, np.zeros(disc.grid.shape))
    Phi = build_phi(constant(1.0), curve, partition_of_unity(curve), disc)
    assert Phi.class_tag == C1_PHI
    # H = 0 on both sides, so the integrand is <grad Phi, n> (h0_1 - h0_0) = -1
    val = boundary_functional(f, curve, Phi, HelfrichParams(1.0, 0.0, 0.0))
    assert val == pytest.approx(-curve.length, rel=1e-10)


def test_boundary_functional_vanishes_without_jump():
    # a spherical cap has no curvature jump; the discrete value is O(h^2)
    R = 2.0
    vals = []
    for n in (32, 64):
        curve, disc = disc_setup(n, radius=0.6)
        f = ScalarField.from_function(disc, lambda X, Y: np.sqrt(R**2 - X**2 - Y**2))
        Phi = build_phi(trig_mode(1.0, 2.0, 1.0, 0.0) + constant(1.0), curve, partition_of_unity(curve), disc)
        vals.append(abs(boundary_functional(f, curve, Phi, HelfrichParams(0.3, 0.3, 0.0))))
    assert vals[0] < 5e-3
    assert vals[1] < vals[0] / 3.0


def test_boundary_functional_requires_phi_zero_on_curve(setup):
    curve, disc = setup
    f = ScalarField(disc, np.zeros(disc.grid.shape))
    with pytest.raises(PhiNotZeroOnE):
        boundary_functional(f, curve, smooth_phi(disc), HelfrichParams(1.0, 0.0, 0.0))
