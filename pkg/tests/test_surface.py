from __future__ import annotations

import numpy as np
import pytest

from conftest import disc_setup
from phasehelfrich.curve import circle_curve
from phasehelfrich.errors import CurveTooClose
from phasehelfrich.surface import (
    A0,
    A1,
    NEAR_E,
    Discretization,
    Domain,
    Grid,
    ScalarField,
    derivatives,
    extend_to_interface,
    graph_mean_curvature,
    label_phases,
    mean_curvature,
)


def quad(X, Y):
    return 0.3 + 0.7 * X - 0.2 * Y + 1.1 * X**2 - 0.4 * X * Y + 0.6 * Y**2


QUAD_JET = lambda x, y: np.array([2.2 * x - 0.4 * y + 0.7, -0.4 * x + 1.2 * y - 0.2])  # noqa: E731


def interior_nodes(disc, labels, count=25, seed=0):
    rng = np.random.default_rng(seed)
    ii, jj = np.nonzero(disc.grid.domain_mask & np.isin(disc.layout.labels, labels))
    k = rng.choice(len(ii), size=min(count, len(ii)), replace=False)
    return list(zip(ii[k], jj[k]))


def test_quadratic_jets_exact_everywhere(disc32):
    _, disc = disc32
    f = ScalarField.from_function(disc, quad)
    g = disc.grid
    for i, j in interior_nodes(disc, [A0, A1, NEAR_E], 60):
        side = int(disc.layout.side[i, j])
        sides = {side, 1 - side} if disc.layout.labels[i, j] == NEAR_E else {side}
        for s in sides:
            jet = derivatives(f, (i, j), s)
            x, y = g.x[i], g.y[j]
            assert jet.value == pytest.approx(quad(x, y), abs=1e-10)
            assert np.allclose(jet.gradient, QUAD_JET(x, y), atol=1e-9)
            assert np.allclose(jet.hessian, [[2.2, -0.4], [-0.4, 1.2]], atol=1e-8)


def test_cubic_third_derivatives_exact(disc32):
    _, disc = disc32
    f = ScalarField.from_function(disc, lambda X, Y: X**3 - 2 * X**2 * Y + 0.5 * Y**3)
    for i, j in interior_nodes(disc, [A0, A1, NEAR_E], 30, seed=2):
        jet = derivatives(f, (i, j), int(disc.layout.side[i, j]))
        assert jet.third[0, 0, 0] == pytest.approx(6.0, abs=1e-6)
        assert jet.third[0, 0, 1] == pytest.approx(-4.0, abs=1e-6)
        assert jet.third[0, 1, 1] == pytest.approx(0.0, abs=1e-6)
        assert jet.third[1, 1, 1] == pytest.approx(3.0, abs=1e-6)


def test_smooth_second_derivatives_converge_at_second_order():
    errs = []
    for n in (32, 64):
        _, disc = disc_setup(n)
        f = ScalarField.from_function(disc, lambda X, Y: np.sin(2 * X) * np.cos(3 * Y))
        g = disc.grid
        worst = 0.0
        for i, j in interior_nodes(disc, [A0, A1], 40, seed=n):
            jet = derivatives(f, (i, j), int(disc.layout.side[i, j]))
            x, y = g.x[i], g.y[j]
            exact = [-4 * np.sin(2 * x) * np.cos(3 * y), -6 * np.cos(2 * x) * np.sin(3 * y), -9 * np.sin(2 * x) * np.cos(3 * y)]
            worst = max(worst, np.max(np.abs([jet.hessian[0, 0], jet.hessian[0, 1], jet.hessian[1, 1]] - np.array(exact))))
        errs.append(worst)
    assert errs[1] < errs[0] / 3.0


def test_cap_mean_curvature():
    R = 2.0
    cap = lambda X, Y: np.sqrt(R**2 - X**2 - Y**2)  # noqa: E731
    errs = []
    for n in (32, 64):
        curve, disc = disc_setup(n, radius=0.5)
        f = ScalarField.from_function(disc, cap)
        H = [mean_curvature(f, node, int(disc.layout.side[node])) for node in interior_nodes(disc, [A0, A1, NEAR_E], 40, 1)]
        errs.append(np.max(np.abs(np.array(H) + 2.0 / R)))
        _, Hc = extend_to_interface(f, curve, curve.t[::17], 0)
        assert np.max(np.abs(Hc + 1.0)) < 5e-3
    assert errs[0] < 5e-3
    assert errs[1] < errs[0] / 3.0


def test_graph_mean_curvature_formula():
    H, W = graph_mean_curvature(0.0, 0.0, 1.0, 0.0, 1.0)
    assert H == 2.0 and W == 1.0
    # u = x^2/2: W^3 in the denominator of the one-dimensional curvature
    H, W = graph_mean_curvature(1.0, 0.0, 1.0, 0.0, 0.0)
    assert W == pytest.approx(np.sqrt(2))
    assert H == pytest.approx(1.0 / 2**1.5)


def test_one_sided_jets_ignore_the_other_side(disc32):
    curve, disc = disc32
    # kink across the circle: r^2 inside, r^2 + 5 (r - 0.6) outside
    def kinked(X, Y):
        r = np.hypot(X, Y)
        return r**2 + 5.0 * np.maximum(r - 0.6, 0.0)

    f = ScalarField.from_function(disc, kinked)
    smooth = ScalarField.from_function(disc, lambda X, Y: X**2 + Y**2)
    g = disc.grid
    for i, j in interior_nodes(disc, [A0, NEAR_E], 40, 5):
        if disc.layout.side[i, j] != 0:
            continue
        a = derivatives(f, (i, j), 0)
        b = derivatives(smooth, (i, j), 0)
        assert np.allclose(a.hessian, b.hessian, atol=1e-8)
        assert a.value == pytest.approx(g.x[i] ** 2 + g.y[j] ** 2, abs=1e-10)


def test_labels_follow_signed_distance(disc32):
    curve, disc = disc32
    g = disc.grid
    labels = label_phases(g, curve)
    X, Y = g.coords()
    d = np.hypot(X, Y) - 0.6
    assert np.all(labels[d < -2 * g.h - 1e-6] == A0)
    assert np.all(labels[d > 2 * g.h + 1e-6] == A1)
    assert np.all(labels[np.abs(d) < 2 * g.h - 1e-6] == NEAR_E)
    assert set(np.unique(labels)) == {A0, A1, NEAR_E}


def test_no_curve_means_single_phase():
    g = Grid.from_domain(Domain.disc(1.0), 1 / 16)
    assert np.all(label_phases(g, None) == A0)


def test_curve_too_close_to_boundary():
    g = Grid.from_domain(Domain.disc(1.0), 1 / 32)
    with pytest.raises(CurveTooClose):
        Discretization(g, circle_curve((0, 0), 0.95, 256))
    Discretization(g, circle_curve((0, 0), 0.8, 256))


def test_field_rejects_nonfinite(disc32):
    _, disc = disc32
    v = np.zeros(disc.grid.shape)
    v[disc.grid.domain_mask.nonzero()[0][0], disc.grid.domain_mask.nonzero()[1][0]] = np.nan
    with pytest.raises(ValueError):
        ScalarField(disc, v)


def test_rectangle_domain_quadrature_area():
    d = Domain.rectangle(0, 2, 0, 1)
    assert d.area == pytest.approx(2.0)
    g = Grid.from_domain(d, 1 / 16)
    assert g.domain_mask.sum() > 0
