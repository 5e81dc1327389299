"""Arclength-sampled C^{1,1} contact curves.

A :class:`ContactCurve` stores equispaced arclength samples with unit tangents
and unit normals.  Between samples the curve is the cubic Hermite interpolant
of positions and tangents, which is C^1 with bounded second derivative.

Normal orientation: ``normal = sign * rot90(tangent)`` with ``rot90(x, y) =
(-y, x)``.  ``sign = +1`` by default, so a counter-clockwise closed curve has
inward normals.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import CurvatureBoundExceeded, DegenerateCurve, SelfIntersection

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def rot90(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


@dataclass(frozen=True, eq=False)
class ContactCurve:
    t: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray
    closed: bool
    normal_sign: float = 1.0
    descriptor: dict[str, Any] | None = None
    normal_lipschitz: float = field(default=0.0)

    def __post_init__(self):
        for name in ("t", "points", "tangents", "normals"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.normal_lipschitz == 0.0 and len(self.t) > 2:
            object.__setattr__(self, "normal_lipschitz", normal_lipschitz_constant(self))

    @property
    def n_samples(self) -> int:
        return len(self.t)

    @property
    def step(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def length(self) -> float:
        return self.step * (self.n_samples if self.closed else self.n_samples - 1)

    @property
    def n_segments(self) -> int:
        return self.n_samples if self.closed else self.n_samples - 1

    def flipped(self) -> "ContactCurve":
        """Same curve with the opposite unit normal field."""
        return replace(self, normals=-self.normals, normal_sign=-self.normal_sign)

    def segment_eval(self, seg, s):
        """Point, unit tangent, unit normal and curvature vector on segment ``seg`` at local s."""
        seg = np.asarray(seg, dtype=np.int64)
        s = np.asarray(s, dtype=float)[..., None]
        k1 = (seg + 1) % self.n_samples
        p0, p1 = self.points[seg], self.points[k1]
        m0, m1 = self.step * self.tangents[seg], self.step * self.tangents[k1]
        s2, s3 = s * s, s * s * s
        c = (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1
        dc = (6 * s2 - 6 * s) * p0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * p1 + (3 * s2 - 2 * s) * m1
        ddc = (12 * s - 6) * p0 + (6 * s - 4) * m0 + (-12 * s + 6) * p1 + (6 * s - 2) * m1
        speed = np.linalg.norm(dc, axis=-1, keepdims=True)
        tan = dc / speed
        nrm = self.normal_sign * rot90(tan)
        return c, tan, nrm, ddc / self.step**2

    def evaluate(self, t):
        """Point, unit tangent, unit normal at arclength ``t``."""
        t = np.asarray(t, dtype=float)
        u = (t - self.t[0]) / self.step
        if self.closed:
            u = np.mod(u, self.n_samples)
        else:
            u = np.clip(u, 0.0, self.n_segments)
        seg = np.minimum(np.floor(u).astype(np.int64), self.n_segments - 1)
        c, tan, nrm, _ = self.segment_eval(seg, u - seg)
        return c, tan, nrm

    def resampled(self, n_samples: int) -> "ContactCurve":
        """Resample through the Hermite interpolant (or the exact shape when known)."""
        d = self.descriptor or {}
        kind = d.get("type")
        if kind == "circle":
            cur = circle_curve(d["center"], d["radius"], n_samples, clockwise=d.get("clockwise", False))
        elif kind == "ellipse":
            cur = ellipse_curve(d["center"], d["semi_axes"], n_samples, clockwise=d.get("clockwise", False))
        else:
            step = self.length / (n_samples if self.closed else n_samples - 1)
            t = self.t[0] + step * np.arange(n_samples)
            p, tan, _ = self.evaluate(t)
            cur = _finish(t, p, tan, self.closed, self.descriptor)
        return cur if self.normal_sign > 0 else cur.flipped()

    def signed_area(self) -> float:
        """Shoelace area of the sample polygon (positive for counter-clockwise)."""
        x, y = self.points[:, 0], self.points[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def normal_lipschitz_constant(curve: ContactCurve) -> float:
    """Largest chord ratio |nu_j - nu_k| / |t_j - t_k| over neighbours and skip-neighbours."""
    nu = curve.normals
    best = 0.0
    for lag in (1, 2):
        if curve.closed:
            dn = np.linalg.norm(np.roll(nu, -lag, axis=0) - nu, axis=1)
        else:
            if len(nu) <= lag:
                continue
            dn = np.linalg.norm(nu[lag:] - nu[:-lag], axis=1)
        best = max(best, float(dn.max()) / (lag * curve.step))
    return best


def _finish(t, points, tangents, closed, descriptor):
    tangents = tangents / np.linalg.norm(tangents, axis=1, keepdims=True)
    return ContactCurve(t, points, tangents, rot90(tangents), closed, 1.0, descriptor)


def circle_curve(center, radius: float, n_samples: int, clockwise: bool = False) -> ContactCurve:
    center = np.asarray(center, dtype=float)
    if radius <= 0:
        raise DegenerateCurve("circle radius must be positive")
    step = 2 * np.pi * radius / n_samples
    t = step * np.arange(n_samples)
    ang = t / radius * (-1.0 if clockwise else 1.0)
    pts = center + radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    sgn = -1.0 if clockwise else 1.0
    tan = sgn * np.stack([-np.sin(ang), np.cos(ang)], axis=1)
    desc = {"type": "circle", "center": center.tolist(), "radius": float(radius), "clockwise": clockwise}
    return _finish(t, pts, tan, True, desc)


def _ellipse_arclength_table(a: float, b: float, n: int = 4096):
    theta = np.linspace(0.0, 2 * np.pi, n + 1)
    speed = lambda th: np.hypot(a * np.sin(th), b * np.cos(th))  # noqa: E731
    lo, hi = theta[:-1], theta[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    pieces = (speed(mid[:, None] + half[:, None] * _GL_NODES) * _GL_WEIGHTS).sum(1) * half
    return theta, np.concatenate([[0.0], np.cumsum(pieces)]), speed


def ellipse_curve(center, semi_axes, n_samples: int, clockwise: bool = False) -> ContactCurve:
    """Ellipse sampled equispaced in arclength (Gauss-Legendre arclength + Newton inversion)."""
    center = np.asarray(center, dtype=float)
    a, b = (float(v) for v in semi_axes)
    if a <= 0 or b <= 0:
        raise DegenerateCurve("ellipse semi-axes must be positive")
    theta, s_tab, speed = _ellipse_arclength_table(a, b)
    length = s_tab[-1]
    step = length / n_samples
    target = step * np.arange(n_samples)
    th = np.interp(target, s_tab, theta)
    idx = np.clip(np.searchsorted(theta, th) - 1, 0, len(theta) - 2)
    for _ in range(8):
        lo = theta[idx]
        half = 0.5 * (th - lo)
        partial = (speed(lo[:, None] + half[:, None] * (_GL_NODES + 1)) * _GL_WEIGHTS).sum(1) * half
        th = th - (s_tab[idx] + partial - target) / speed(th)
        idx = np.clip(np.searchsorted(theta, th) - 1, 0, len(theta) - 2)
    if clockwise:
        th = -th
    pts = center + np.stack([a * np.cos(th), b * np.sin(th)], axis=1)
    sgn = -1.0 if clockwise else 1.0
    tan = sgn * np.stack([-a * np.sin(th), b * np.cos(th)], axis=1)
    desc = {"type": "ellipse", "center": center.tolist(), "semi_axes": [a, b], "clockwise": clockwise}
    return _finish(target, pts, tan, True, desc)


def segment_curve(p0, p1, n_samples: int) -> ContactCurve:
    p0, p1 = np.asarray(p0, dtype=float), np.asarray(p1, dtype=float)
    length = float(np.linalg.norm(p1 - p0))
    if length < 1e-9:
        raise DegenerateCurve("segment has zero length")
    t = np.linspace(0.0, length, n_samples)
    tan = np.tile((p1 - p0) / length, (n_samples, 1))
    pts = p0 + t[:, None] * tan
    return _finish(t, pts, tan, False, {"type": "segment", "start": p0.tolist(), "end": p1.tolist()})


def _fit_circle(pts: np.ndarray):
    A = np.column_stack([2 * pts, np.ones(len(pts))])
    rhs = (pts**2).sum(1)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    center = sol[:2]
    radius = np.sqrt(max(sol[2] + center @ center, 0.0))
    return center, radius


def _segments_intersect(P: np.ndarray, closed: bool) -> bool:
    """Proper intersection between any two non-adjacent polyline segments."""
    A = P if not closed else P
    B = np.roll(P, -1, axis=0) if closed else P[1:]
    if not closed:
        A = P[:-1]
    n = len(A)
    d = B - A
    for i in range(n):
        j = np.arange(i + 2, n)
        if closed and i == 0:
            j = j[j != n - 1]
        if len(j) == 0:
            continue
        r, s = d[i], d[j]
        denom = r[0] * s[:, 1] - r[1] * s[:, 0]
        qp = A[j] - A[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            tt = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / denom
            uu = (qp[:, 0] * r[1] - qp[:, 1] * r[0]) / denom
        hit = (np.abs(denom) > 1e-300) & (tt > 0) & (tt < 1) & (uu > 0) & (uu < 1)
        if hit.any():
            return True
    return False


def resample_arclength(
    raw_points, closed: bool, n_samples: int, max_curvature: float | None = None
) -> ContactCurve:
    """Fit a C^{1,1} interpolant through ``raw_points`` and sample it equispaced in arclength.

    Exact circles (closed input) and collinear input (open) are recognised and
    returned with their analytic descriptor.
    """
    pts = np.asarray(raw_points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DegenerateCurve("expected an (n, 2) array of points")
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.linalg.norm(np.diff(pts, axis=0), axis=1) > 1e-14
    pts = pts[keep]
    if closed and len(pts) > 1 and np.linalg.norm(pts[0] - pts[-1]) <= 1e-14:
        pts = pts[:-1]
    if len(pts) < 3:
        raise DegenerateCurve("need at least 3 distinct points")
    chord = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]) if closed else pts, axis=0), axis=1)
    if chord.sum() < 1e-9:
        raise DegenerateCurve("total length below 1e-9")

    if closed:
        center, radius = _fit_circle(pts)
        if radius > 0 and np.max(np.abs(np.linalg.norm(pts - center, axis=1) - radius)) <= 1e-9 * radius:
            ccw = np.sum(pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1]) > 0
            cur = circle_curve(center, radius, n_samples, clockwise=not ccw)
            if max_curvature is not None and 1.0 / radius > max_curvature:
                raise CurvatureBoundExceeded(f"curvature {1 / radius:g} exceeds bound {max_curvature:g}")
            return cur
    else:
        direction = pts[-1] - pts[0]
        nrm = np.linalg.norm(direction)
        if nrm > 0:
            off = np.abs((pts - pts[0]) @ rot90(direction / nrm))
            proj = (pts - pts[0]) @ (direction / nrm)
            if off.max() <= 1e-12 * max(1.0, nrm) and np.all(np.diff(proj) > 0):
                return segment_curve(pts[0], pts[-1], n_samples)

    if closed:
        knots = np.concatenate([[0.0], np.cumsum(chord)])
        spline = CubicSpline(knots, np.vstack([pts, pts[:1]]), bc_type="periodic")
    else:
        knots = np.concatenate([[0.0], np.cumsum(chord)])
        spline = CubicSpline(knots, pts, bc_type="not-a-knot")
    dspline = spline.derivative()

    lo, hi = knots[:-1], knots[1:]
    sub = 16
    edges = np.linspace(lo, hi, sub + 1, axis=1).ravel()
    edges = np.unique(edges)
    a, b = edges[:-1], edges[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    q = mid[:, None] + half[:, None] * _GL_NODES
    speed = np.linalg.norm(dspline(q.ravel()), axis=1).reshape(q.shape)
    s_tab = np.concatenate([[0.0], np.cumsum((speed * _GL_WEIGHTS).sum(1) * half)])
    length = s_tab[-1]
    if length < 1e-9:
        raise DegenerateCurve("total length below 1e-9")

    m = n_samples
    step = length / (m if closed else m - 1)
    target = step * np.arange(m)
    u = np.interp(target, s_tab, edges)
    for _ in range(6):
        idx = np.clip(np.searchsorted(edges, u, side="right") - 1, 0, len(edges) - 2)
        e0 = edges[idx]
        hh = 0.5 * (u - e0)
        qq = e0[:, None] + hh[:, None] * (_GL_NODES + 1)
        sp = np.linalg.norm(dspline(qq.ravel()), axis=1).reshape(qq.shape)
        s_u = s_tab[idx] + (sp * _GL_WEIGHTS).sum(1) * hh
        u = u - (s_u - target) / np.linalg.norm(dspline(u), axis=1)

    p = spline(u)
    d1 = dspline(u)
    if max_curvature is not None:
        d2 = spline.derivative(2)(u)
        kappa = np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / np.linalg.norm(d1, axis=1) ** 3
        if kappa.max() > max_curvature:
            raise CurvatureBoundExceeded(f"curvature {kappa.max():g} exceeds bound {max_curvature:g}")
    dense = spline(np.linspace(knots[0], knots[-1], min(8 * len(pts), 4000), endpoint=not closed))
    if _segments_intersect(dense, closed):
        raise SelfIntersection("interpolating spline self-intersects")
    return _finish(target, p, d1, closed, {"type": "spline"})


def read_curve_csv(path) -> np.ndarray:
    """Read "x,y" rows; a non-numeric first row is treated as a header."""
    rows = []
    with open(Path(path), newline="") as fh:
        for k, row in enumerate(csv.reader(fh)):
            if not row or not "".join(row).strip():
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if k == 0:
                    continue
                raise
    return np.asarray(rows, dtype=float)
