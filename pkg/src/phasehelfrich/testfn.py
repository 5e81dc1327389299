"""Smooth bumps, normalised bump partitions near E, and the test functions
Phi = phi * d_pm * sum sigma_i (C^1 across E, zero on E) and
psi = phi * d_0 * sum sigma_i (one-sided).

Every function here is an exact callable ``f(x, y)`` with ``f.grad(points)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve import ContactCurve
from .errors import CoverageFailure
from .reach import _sample_reach, signed_distance_with_gradient
from .variation import C1_PHI, ONESIDED_PSI, TestFunction

COVER_FLOOR = 1e-3
RADIUS_FACTOR = 0.8


class SmoothFunction:
    """Scalar function with an exact gradient; closed under + and scalar *."""

    def __init__(self, value, grad):
        self._value = value
        self._grad = grad

    def __call__(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return self._value(x, y)

    def grad(self, points) -> np.ndarray:
        P = np.atleast_2d(np.asarray(points, dtype=float))
        return np.asarray(self._grad(P[:, 0], P[:, 1]), dtype=float).reshape(-1, 2)

    def __add__(self, other: "SmoothFunction") -> "SmoothFunction":
        return SmoothFunction(lambda x, y: self(x, y) + other(x, y), lambda x, y: self.grad(np.stack([x, y], 1)) + other.grad(np.stack([x, y], 1)))

    def __mul__(self, a: float) -> "SmoothFunction":
        a = float(a)
        return SmoothFunction(lambda x, y: a * self(x, y), lambda x, y: a * self.grad(np.stack([x, y], 1)))

    __rmul__ = __mul__

    def times(self, other: "SmoothFunction") -> "SmoothFunction":
        """Pointwise product (product rule for the gradient)."""

        def grad(x, y):
            P = np.stack([x, y], 1)
            return self(x, y)[:, None] * other.grad(P) + other(x, y)[:, None] * self.grad(P)

        return SmoothFunction(lambda x, y: self(x, y) * other(x, y), grad)


def constant(c: float) -> SmoothFunction:
    c = float(c)
    return SmoothFunction(lambda x, y: np.full(np.broadcast(x, y).shape, c), lambda x, y: np.zeros((np.size(x), 2)))


def plane(a: float, b: float, c: float = 0.0) -> SmoothFunction:
    return SmoothFunction(lambda x, y: a * x + b * y + c, lambda x, y: np.stack([np.full(np.size(x), a), np.full(np.size(x), b)], 1))


def trig_mode(amp: float, kx: float, ky: float, phase: float) -> SmoothFunction:
    """amp * sin(kx x + ky y + phase)."""

    def grad(x, y):
        c = amp * np.cos(kx * x + ky * y + phase)
        return np.stack([kx * c, ky * c], 1)

    return SmoothFunction(lambda x, y: amp * np.sin(kx * x + ky * y + phase), grad)


def bump(center, radius: float) -> SmoothFunction:
    """exp(1 - 1/(1 - q)) with q = |y - c|^2 / r^2 inside the ball, 0 outside."""
    c = np.asarray(center, dtype=float)
    r2 = float(radius) ** 2

    def value(x, y):
        q = ((x - c[0]) ** 2 + (y - c[1]) ** 2) / r2
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.exp(1.0 - 1.0 / (1.0 - q))
        return np.where(q < 1.0, out, 0.0)

    def grad(x, y):
        q = ((x - c[0]) ** 2 + (y - c[1]) ** 2) / r2
        inside = q < 1.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            b = np.exp(1.0 - 1.0 / (1.0 - q))
            fac = np.where(inside, -b / (1.0 - q) ** 2 * 2.0 / r2, 0.0)
        return np.stack([fac * (x - c[0]), fac * (y - c[1])], 1)

    return SmoothFunction(value, grad)


def _smoothstep(s, lo: float, hi: float):
    """C^infinity step: 0 below lo, 1 above hi, and its derivative."""
    z = np.clip((np.asarray(s, dtype=float) - lo) / (hi - lo), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f = lambda v: np.where(v > 0, np.exp(-1.0 / v), 0.0)  # noqa: E731
        df = lambda v: np.where(v > 0, np.exp(-1.0 / v) / (v * v), 0.0)  # noqa: E731
        a, b = f(z), f(1.0 - z)
        da, db = df(z), -df(1.0 - z)
        val = a / (a + b)
        dval = (da * (a + b) - a * (da + db)) / (a + b) ** 2 / (hi - lo)
    return val, np.where((z > 0) & (z < 1), dval, 0.0)


@dataclass(frozen=True, eq=False)
class Partition:
    """sigma_i = b_i * step(S) / S with S = sum_j b_j; sum_i sigma_i = step(S)."""

    centers: np.ndarray
    radii: np.ndarray
    s_min: float

    def __len__(self) -> int:
        return len(self.radii)

    def raw(self, points):
        """Bump values b_i (m, k) and gradients (m, k, 2)."""
        P = np.atleast_2d(np.asarray(points, dtype=float))
        m, k = len(P), len(self.radii)
        vals = np.zeros((m, k))
        grads = np.zeros((m, k, 2))
        for i, (c, r) in enumerate(zip(self.centers, self.radii)):
            d2 = np.sum((P - c) ** 2, axis=1)
            near = d2 < r * r
            if near.any():
                b = bump(c, r)
                vals[near, i] = b(P[near, 0], P[near, 1])
                grads[near, i] = b.grad(P[near])
        return vals, grads

    def sigmas(self, points):
        """(sigma (m, k), grad sigma (m, k, 2))."""
        b, gb = self.raw(points)
        S = b.sum(axis=1)
        gS = gb.sum(axis=1)
        psi, dpsi = _smoothstep(S, 0.25 * self.s_min, 0.5 * self.s_min)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(S > 0, psi / S, 0.0)
            dratio = np.where(S > 0, (dpsi * S - psi) / (S * S), 0.0)
        sig = b * ratio[:, None]
        gsig = gb * ratio[:, None, None] + b[:, :, None] * (dratio[:, None] * gS)[:, None, :]
        return sig, gsig

    def total(self, points):
        """sum_i sigma_i and its gradient."""
        sig, gsig = self.sigmas(points)
        return sig.sum(axis=1), gsig.sum(axis=1)


def partition_of_unity(curve: ContactCurve, support_region=None, n_bumps: int | None = None) -> Partition:
    """Deterministic bump cover of (support_region ∩ E).

    ``support_region`` is ``(center, radius)`` of a disc or None for all of E.
    Centers are curve samples, radii 0.8 x the reach radius there; spacing is
    at most a quarter of the smallest radius.
    """
    pts = np.asarray(curve.points)
    reach = _sample_reach(curve)
    if support_region is None:
        target = np.ones(curve.n_samples, dtype=bool)
    else:
        c, r = support_region
        target = np.linalg.norm(pts - np.asarray(c, dtype=float), axis=1) <= float(r)
    if not target.any():
        return Partition(np.zeros((0, 2)), np.zeros(0), 1.0)
    radii_all = RADIUS_FACTOR * reach
    if n_bumps is None:
        stride = max(1, int(0.25 * radii_all.min() / curve.step))
    else:
        stride = max(1, curve.n_samples // int(n_bumps))
    picks = np.arange(0, curve.n_samples, stride)
    if not curve.closed and picks[-1] != curve.n_samples - 1:
        picks = np.append(picks, curve.n_samples - 1)
    # keep bumps that touch the target arc
    tpts = pts[target]
    keep = [k for k in picks if np.min(np.linalg.norm(tpts - pts[k], axis=1)) < radii_all[k]]
    centers, radii = pts[keep], radii_all[keep]
    part = Partition(centers, radii, 1.0)
    S = part.raw(tpts)[0].sum(axis=1)
    if S.min() < COVER_FLOOR:
        raise CoverageFailure(f"bump sum {S.min():.3g} below {COVER_FLOOR} on the target arc")
    return Partition(centers, radii, float(S.min()))


class _CurveTestFunction:
    """phi * dist_fn * sum sigma_i, where dist_fn is d_pm or d_0."""

    def __init__(self, phi, curve: ContactCurve, partition: Partition, one_sided: bool):
        self.phi, self.curve, self.partition, self.one_sided = phi, curve, partition, one_sided

    def _parts(self, P, a0_closed: bool = False):
        m = len(P)
        val = np.zeros(m)
        grad = np.zeros((m, 2))
        if len(self.partition) == 0:
            return val, grad
        reach = np.zeros(m, dtype=bool)
        for c, r in zip(self.partition.centers, self.partition.radii):
            reach |= np.sum((P - c) ** 2, axis=1) < r * r
        if not reach.any():
            return val, grad
        Q = P[reach]
        S, gS = self.partition.total(Q)
        d, gd = signed_distance_with_gradient(self.curve, Q)
        if self.one_sided:
            inside = (d <= 0) if a0_closed else (d < 0)
            gd = np.where(inside[:, None], -gd, 0.0)
            d = np.where(inside, -d, 0.0)
        f = self.phi(Q[:, 0], Q[:, 1])
        gf = self.phi.grad(Q)
        val[reach] = f * d * S
        grad[reach] = gf * (d * S)[:, None] + f[:, None] * (gd * S[:, None] + d[:, None] * gS)
        return val, grad

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        val, _ = self._parts(np.stack([x.ravel(), y.ravel()], 1))
        return val.reshape(x.shape)

    def grad(self, points) -> np.ndarray:
        return self._parts(np.atleast_2d(np.asarray(points, dtype=float)))[1]

    def grad_from_a0(self, points) -> np.ndarray:
        """Gradient with points on E treated as limits from the A0 side."""
        return self._parts(np.atleast_2d(np.asarray(points, dtype=float)), a0_closed=True)[1]


def build_phi(phi_outer, curve: ContactCurve, partition: Partition, disc=None):
    """Phi = phi * d_pm * sum sigma_i: zero on E with grad Phi = phi * n_E there.

    Returns the exact callable; with ``disc`` given, a C1_PHI TestFunction
    sampled on that grid.
    """
    fn = _CurveTestFunction(phi_outer, curve, partition, one_sided=False)
    if disc is None:
        return fn
    return TestFunction.sample(disc, fn, C1_PHI)


def build_psi(phi_outer, curve: ContactCurve, partition: Partition, disc=None):
    """psi = phi * d_0 * sum sigma_i with d_0 = dist to E on A0 (d_pm < 0), 0 on A1.

    Its one-sided gradient on E from A0 is -phi * n_E.
    """
    fn = _CurveTestFunction(phi_outer, curve, partition, one_sided=True)
    if disc is None:
        return fn
    return TestFunction.sample(disc, fn, ONESIDED_PSI)
