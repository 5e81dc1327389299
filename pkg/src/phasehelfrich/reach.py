"""Closest-point projection, reach radius and signed distances to a contact curve.

Orientation conventions (read these before using the sign of anything):

* ``lam`` follows ``foot - y = lam * nu(foot)``, i.e. foot minus query.
* ``d_pm`` is positive on the side the normal ``nu`` points into, so that
  ``grad d_pm = nu`` on the curve and ``d_pm`` is C^1 across it.  With
  ``foot - y = lam * nu`` this means ``d_pm = -sign(lam) * dist``.
* Phase A0 is the side ``d_pm < 0``; ``nu`` therefore points from A0 into A1.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .curve import ContactCurve
from .errors import AmbiguousProjection, OutOfBand

AMBIGUITY_RTOL = 1e-6
_ON_CURVE = 1e-13

_trees: "weakref.WeakKeyDictionary[ContactCurve, cKDTree]" = weakref.WeakKeyDictionary()
_reach_cache: "weakref.WeakKeyDictionary[ContactCurve, np.ndarray]" = weakref.WeakKeyDictionary()


@dataclass(frozen=True)
class ProjectionResult:
    foot: np.ndarray
    param: float
    lam: float
    distance: float
    unique: bool = True


def _tree(curve: ContactCurve) -> cKDTree:
    tree = _trees.get(curve)
    if tree is None:
        tree = cKDTree(curve.points)
        _trees[curve] = tree
    return tree


def project_points(curve: ContactCurve, Y):
    """Batch closest point (no ambiguity check).

    Returns (foot, param, lam, distance, normal_at_foot).
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    _, seeds = _tree(curve).query(Y)
    seg, s, d2 = kernels.hermite_project(
        curve.points, curve.tangents, curve.step, curve.closed, Y, np.asarray(seeds, dtype=np.int64)
    )
    foot, _, nu, _ = curve.segment_eval(seg, s)
    dist = np.sqrt(d2)
    lam = np.sign(np.sum((foot - Y) * nu, axis=1)) * dist
    param = curve.t[0] + (seg + s) * curve.step
    return foot, param, lam, dist, nu


def signed_distance_points(curve: ContactCurve, Y) -> np.ndarray:
    """Batch d_pm (positive on the side nu points into)."""
    _, _, lam, dist, _ = project_points(curve, Y)
    return np.where(dist <= _ON_CURVE, 0.0, -np.sign(lam) * dist)


def signed_distance_with_gradient(curve: ContactCurve, Y):
    """Batch (d_pm, grad d_pm)."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    foot, _, lam, dist, nu = project_points(curve, Y)
    on = dist <= _ON_CURVE
    with np.errstate(invalid="ignore", divide="ignore"):
        radial = -np.sign(lam)[:, None] * (Y - foot) / dist[:, None]
    grad = np.where(on[:, None], nu, radial)
    d = np.where(on, 0.0, -np.sign(lam) * dist)
    return d, grad


def project(curve: ContactCurve, y, check_band: bool = True) -> ProjectionResult:
    """Unique nearest point of the curve to ``y``.

    Raises AmbiguousProjection when a second, non-adjacent local minimiser is
    within AMBIGUITY_RTOL of the best distance, and OutOfBand when the query is
    not inside the empty tangent ball at the foot (or the foot is an open-curve
    endpoint).
    """
    y = np.asarray(y, dtype=float).reshape(1, 2)
    i1, d1, i2, d2 = kernels.sample_scan(curve.points, curve.closed, y)
    seeds = [int(i1[0])]
    m = curve.n_samples
    if i2[0] >= 0:
        gap = abs(int(i2[0]) - int(i1[0]))
        if curve.closed:
            gap = min(gap, m - gap)
        if gap > 2:
            seeds.append(int(i2[0]))
    cands = []
    for sd in seeds:
        seg, s, dd = kernels.hermite_project(
            curve.points, curve.tangents, curve.step, curve.closed, y, np.array([sd], dtype=np.int64)
        )
        cands.append((float(np.sqrt(dd[0])), int(seg[0]), float(s[0])))
    cands.sort()
    dist, seg, s = cands[0]
    if len(cands) > 1:
        other = cands[1][0]
        foot_a = curve.segment_eval(np.array([seg]), np.array([s]))[0][0]
        foot_b = curve.segment_eval(np.array([cands[1][1]]), np.array([cands[1][2]]))[0][0]
        separated = np.linalg.norm(foot_a - foot_b) > 2 * curve.step
        if separated and other - dist <= AMBIGUITY_RTOL * max(dist, 1e-300):
            raise AmbiguousProjection(f"two nearest points at distance {dist:.6g} and {other:.6g}")
    foot, _, nu, _ = curve.segment_eval(np.array([seg]), np.array([s]))
    foot, nu = foot[0], nu[0]
    param = float(curve.t[0] + (seg + s) * curve.step)
    if check_band:
        if not curve.closed and dist > _ON_CURVE and (param <= curve.t[0] + 1e-9 * curve.step or param >= curve.t[-1] - 1e-9 * curve.step):
            raise OutOfBand("nearest point is an endpoint of the open curve")
        if dist > _ON_CURVE:
            limit = tangent_ball_radius(curve, foot, (y[0] - foot) / dist)
            if dist >= limit:
                raise OutOfBand(f"distance {dist:.6g} exceeds the empty tangent ball radius {limit:.6g} at the foot")
    if dist <= _ON_CURVE:
        lam = 0.0
    else:
        lam = float(np.sign(np.dot(foot - y[0], nu)) * dist)
    return ProjectionResult(foot=foot, param=param, lam=lam, distance=dist, unique=True)


def tangent_ball_radius(curve: ContactCurve, foot, direction) -> float:
    """Radius of the largest ball touching the curve at ``foot`` from ``direction``
    that contains no curve sample.

    Any query closer to ``foot`` than this radius along ``direction`` has
    ``foot`` as its unique nearest point, which makes it a sharp band test.
    """
    v = curve.points - np.asarray(foot, dtype=float)
    s = v @ np.asarray(direction, dtype=float)
    r2 = np.sum(v * v, axis=1)
    ok = (s > 0) & (r2 > 1e-24)
    if not ok.any():
        return np.inf
    return float(np.min(r2[ok] / (2 * s[ok])))


def _adjacent_mask(D: np.ndarray, k: int, closed: bool) -> np.ndarray:
    """Samples reachable from k while the distance to sample k keeps growing."""
    m = len(D)
    adj = np.zeros(m, dtype=bool)
    adj[k] = True
    for direction in (1, -1):
        if closed:
            order = (k + direction * np.arange(m)) % m
        else:
            order = np.arange(k, m) if direction == 1 else np.arange(k, -1, -1)
        run = D[order]
        drops = np.nonzero(np.diff(run) < 0)[0]
        stop = drops[0] + 1 if drops.size else len(run)
        adj[order[:stop]] = True
    return adj


def _sample_reach(curve: ContactCurve) -> np.ndarray:
    """Reach radius at every sample (cached)."""
    cached = _reach_cache.get(curve)
    if cached is not None:
        return cached
    L = curve.normal_lipschitz
    base = 0.5 / L if L > 1e-12 else np.inf
    P = curve.points
    m = len(P)
    out = np.empty(m)
    for k in range(m):
        D = np.linalg.norm(P - P[k], axis=1)
        adj = _adjacent_mask(D, k, curve.closed)
        sep = 0.5 * D[~adj].min() if (~adj).any() else np.inf
        val = min(base, sep)
        if not curve.closed:
            val = min(val, abs(curve.t[k] - curve.t[0]), abs(curve.t[-1] - curve.t[k]))
        out[k] = val
    _reach_cache[curve] = out
    return out


def reach_radius(curve: ContactCurve, x) -> float:
    """delta with unique projection on B_{delta/2}(x) for ``x`` on the curve.

    delta = min(1 / (2 L), half the distance to non-adjacent arcs); open curves
    are further capped by the distance to the nearest endpoint.
    """
    x = np.asarray(x, dtype=float)
    foot, param, _, dist, _ = project_points(curve, x[None, :])
    L = curve.normal_lipschitz
    base = 0.5 / L if L > 1e-12 else np.inf
    D = np.linalg.norm(curve.points - foot[0], axis=1)
    k = int(np.argmin(D))
    adj = _adjacent_mask(D, k, curve.closed)
    # the samples bracketing the foot are adjacent whatever the scan says
    for j in (k - 1, k + 1):
        if curve.closed or 0 <= j < curve.n_samples:
            adj[j % curve.n_samples] = True
    sep = 0.5 * D[~adj].min() if (~adj).any() else np.inf
    val = min(base, sep)
    if not curve.closed:
        val = min(val, float(param[0] - curve.t[0]), float(curve.t[-1] - param[0]))
    return float(val)


def min_reach(curve: ContactCurve) -> float:
    """Smallest reach radius over the samples."""
    return float(_sample_reach(curve).min())


def signed_distance(curve: ContactCurve, y) -> float:
    res = project(curve, y)
    if res.distance <= _ON_CURVE:
        return 0.0
    return -np.sign(res.lam) * res.distance


def signed_distance_gradient(curve: ContactCurve, y) -> np.ndarray:
    """grad d_pm: nu(foot) on the curve, -sign(lam) (y - P(y)) / |y - P(y)| off it."""
    y = np.asarray(y, dtype=float)
    res = project(curve, y)
    if res.distance <= _ON_CURVE:
        _, _, nu = curve.evaluate(res.param)
        return np.asarray(nu, dtype=float).reshape(2)
    return -np.sign(res.lam) * (y - res.foot) / res.distance


def one_sided_distance(curve: ContactCurve, y, a0_sign: float = -1.0) -> float:
    """d_0: distance to the curve on the A0 side (and on the curve), zero elsewhere.

    ``a0_sign`` gives the sign of d_pm on A0 (-1 with the package convention).
    """
    return float(one_sided_distance_points(curve, np.asarray(y, dtype=float)[None, :], a0_sign)[0])


def one_sided_distance_points(curve: ContactCurve, Y, a0_sign: float = -1.0) -> np.ndarray:
    d = signed_distance_points(curve, Y)
    return np.where(a0_sign * d >= 0.0, np.abs(d), 0.0)


def one_sided_distance_gradient_points(curve: ContactCurve, Y, a0_sign: float = -1.0) -> np.ndarray:
    """Gradient of d_0, taken from the A0 side on the curve itself."""
    d, g = signed_distance_with_gradient(curve, Y)
    inside = a0_sign * d > 0.0
    on = d == 0.0
    return np.where((inside | on)[:, None], a0_sign * g, 0.0)
