from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phasehelfrich.curve import circle_curve, ellipse_curve, resample_arclength, segment_curve
from phasehelfrich.errors import AmbiguousProjection, OutOfBand
from phasehelfrich.reach import (
    min_reach,
    one_sided_distance,
    one_sided_distance_gradient_points,
    project,
    reach_radius,
    signed_distance,
    signed_distance_gradient,
    signed_distance_with_gradient,
)


def brute_force_foot(a, b, y, n=1_000_000):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    P = np.stack([a * np.cos(t), b * np.sin(t)], 1)
    k = np.argmin(np.sum((P - y) ** 2, axis=1))
    return P[k], float(np.linalg.norm(P[k] - y))


def test_circle_projection_inside():
    c = circle_curve((0, 0), 1.0, 512).flipped()  # outward normals
    r = project(c, [0.5, 0.0])
    assert np.allclose(r.foot, [1.0, 0.0], atol=1e-12)
    assert r.lam == pytest.approx(0.5, abs=1e-12)
    assert r.distance == pytest.approx(0.5, abs=1e-12)
    # foot - y = lam * nu(foot)
    assert np.allclose(r.foot - np.array([0.5, 0.0]), r.lam * np.array([1.0, 0.0]), atol=1e-9)


def test_projection_of_curve_point_is_itself():
    c = ellipse_curve((0, 0), (2.0, 1.0), 800)
    y = c.points[37]
    r = project(c, y)
    assert np.allclose(r.foot, y, atol=1e-12)
    assert r.lam == 0.0 and r.distance == pytest.approx(0.0, abs=1e-12)


def test_ellipse_projection_matches_brute_force():
    c = ellipse_curve((0, 0), (2.0, 1.0), 2000)
    y = np.array([0.0, 0.5])
    r = project(c, y)
    foot, dist = brute_force_foot(2.0, 1.0, y)
    assert np.linalg.norm(r.foot - foot) < 1e-5
    assert abs(r.distance - dist) < 1e-6
    tangent = c.evaluate(r.param)[1]
    assert abs(np.dot(tangent, r.foot - y)) < 1e-8


@pytest.mark.parametrize("r", [0.3, 0.6, 1.5])
def test_circle_reach_at_least_half_radius(r):
    c = circle_curve((0, 0), r, 1024)
    assert reach_radius(c, c.points[0]) >= 0.5 * r * (1 - 1e-3)


def test_segment_reach_capped_by_endpoints():
    c = segment_curve((0, 0), (1, 0), 101)
    assert reach_radius(c, [0.3, 0.0]) == pytest.approx(0.3, abs=1e-9)
    assert reach_radius(c, [0.9, 0.0]) == pytest.approx(0.1, abs=1e-9)


def u_curve(gap: float):
    """Open U with straight arms ``gap`` apart."""
    left = np.stack([np.full(20, -gap / 2), np.linspace(1.0, 0.0, 20)], 1)
    th = np.linspace(np.pi, 2 * np.pi, 15)[1:-1]
    bottom = np.stack([gap / 2 * np.cos(th), -0.0 + gap / 2 * np.sin(th)], 1)
    right = np.stack([np.full(20, gap / 2), np.linspace(0.0, 1.0, 20)], 1)
    return resample_arclength(np.vstack([left, bottom, right]), False, 600)


def test_u_curve_reach_is_bounded_by_gap():
    c = u_curve(0.2)
    x = np.array([-0.1, 0.6])
    assert reach_radius(c, x) <= 0.1 + 1e-9
    # the midpoint between the arms is ambiguous
    with pytest.raises((AmbiguousProjection, OutOfBand)):
        project(c, [0.0, 0.6])


def test_signed_distance_sign_convention():
    c = circle_curve((0, 0), 1.0, 1024).flipped()
    assert signed_distance(c, [0.8, 0.0]) == pytest.approx(-0.2, abs=1e-12)
    assert signed_distance(c, [1.2, 0.0]) == pytest.approx(0.2, abs=1e-12)
    assert signed_distance(c, c.points[5]) == 0.0
    assert signed_distance(c.flipped(), [0.8, 0.0]) == pytest.approx(0.2, abs=1e-12)
    assert np.allclose(signed_distance_gradient(c, [1.2, 0.0]), [1.0, 0.0], atol=1e-12)


def test_gradient_on_curve_is_normal():
    c = ellipse_curve((0, 0), (1.0, 0.6), 700)
    for k in (0, 100, 333):
        assert np.allclose(signed_distance_gradient(c, c.points[k]), c.normals[k], atol=1e-12)


def test_out_of_band_raised():
    c = circle_curve((0, 0), 0.5, 512)
    with pytest.raises((OutOfBand, AmbiguousProjection)):
        project(c, [0.0, 0.0])
    with pytest.raises(OutOfBand):
        project(segment_curve((0, 0), (1, 0), 50), [1.5, 0.3])


def test_one_sided_distance():
    c = circle_curve((0, 0), 1.0, 1024).flipped()  # A0 = inside (d < 0)
    assert one_sided_distance(c, [0.9, 0.0]) == pytest.approx(0.1, abs=1e-12)
    assert one_sided_distance(c, [1.3, 0.0]) == 0.0
    assert one_sided_distance(c, c.points[10]) == 0.0
    g = one_sided_distance_gradient_points(c, c.points[10:11])
    assert np.linalg.norm(g) == pytest.approx(1.0, abs=1e-12)


@given(st.floats(-0.45, 0.45), st.integers(0, 599))
def test_gradient_unit_and_fd(off, k):
    c = ellipse_curve((0, 0), (1.2, 0.8), 600)
    delta = min_reach(c)
    y = c.points[k] + off * delta * c.normals[k]
    d, g = signed_distance_with_gradient(c, y[None, :])
    assert np.linalg.norm(g[0]) == pytest.approx(1.0, abs=1e-12)
    s = 1e-5
    fd = [(signed_distance_with_gradient(c, (y + e)[None, :])[0][0] - signed_distance_with_gradient(c, (y - e)[None, :])[0][0]) / (2 * s)
          for e in (np.array([s, 0.0]), np.array([0.0, s]))]
    assert np.linalg.norm(g[0] - fd) < 1e-6


@given(st.floats(0.0, 2 * np.pi), st.floats(-0.4, 0.4), st.floats(0.0, 2 * np.pi), st.floats(-0.4, 0.4))
def test_signed_distance_is_one_lipschitz(a1, o1, a2, o2):
    c = circle_curve((0, 0), 0.9, 512)
    Y = np.array([(0.9 + o1) * np.array([np.cos(a1), np.sin(a1)]), (0.9 + o2) * np.array([np.cos(a2), np.sin(a2)])])
    d, _ = signed_distance_with_gradient(c, Y)
    assert abs(d[0] - d[1]) <= np.linalg.norm(Y[0] - Y[1]) + 1e-9


def test_gradient_continuous_across_curve():
    c = ellipse_curve((0, 0), (1.0, 0.7), 900)
    k = 123
    steps = np.linspace(-1e-3, 1e-3, 201)
    Y = c.points[k] + steps[:, None] * c.normals[k]
    _, g = signed_distance_with_gradient(c, Y)
    assert np.max(np.linalg.norm(np.diff(g, axis=0), axis=1)) < 1e-4


def test_projection_is_holder_continuous():
    c = ellipse_curve((0, 0), (1.0, 0.7), 900)
    rng = np.random.default_rng(3)
    delta = min_reach(c)
    for _ in range(50):
        k = rng.integers(c.n_samples)
        y1 = c.points[k] + rng.uniform(-0.4, 0.4) * delta * c.normals[k]
        y2 = y1 + rng.normal(size=2) * 1e-4
        f1, f2 = project(c, y1).foot, project(c, y2).foot
        assert np.linalg.norm(f1 - f2) <= 10 * np.sqrt(np.linalg.norm(y1 - y2))
