"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""
from __future__ import annotations

import numpy as np


def _hermite(P, T, k0, k1, step, s):
    s = s[..., None]
    s2, s3 = s * s, s * s * s
    p0, p1 = P[k0], P[k1]
    m0, m1 = step * T[k0], step * T[k1]
    c = (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1
    dc = (6 * s2 - 6 * s) * p0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * p1 + (3 * s2 - 2 * s) * m1
    ddc = (12 * s - 6) * p0 + (6 * s - 4) * m0 + (-12 * s + 6) * p1 + (6 * s - 2) * m1
    return c, dc, ddc


def _g(P, T, k0, k1, step, s, Y):
    c, dc, ddc = _hermite(P, T, k0, k1, step, s)
    r = c - Y
    g = np.sum(dc * r, axis=-1)
    gp = np.sum(dc * dc, axis=-1) + np.sum(ddc * r, axis=-1)
    return g, gp


def _segment_min(P, T, k0, k1, step, Y):
    n = len(Y)
    g0, _ = _g(P, T, k0, k1, step, np.zeros(n), Y)
    g1, _ = _g(P, T, k0, k1, step, np.ones(n), Y)
    s = np.where(g0 >= 0.0, 0.0, np.where(g1 <= 0.0, 1.0, 0.5))
    active = (g0 < 0.0) & (g1 > 0.0)
    lo = np.zeros(n)
    hi = np.ones(n)
    for _ in range(60):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        g, gp = _g(P, T, k0[idx], k1[idx], step, s[idx], Y[idx])
        lo_i = np.where(g < 0.0, s[idx], lo[idx])
        hi_i = np.where(g < 0.0, hi[idx], s[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            snew = np.where(gp > 0.0, s[idx] - g / gp, 0.5 * (lo_i + hi_i))
        bad = (snew <= lo_i) | (snew >= hi_i)
        snew = np.where(bad, 0.5 * (lo_i + hi_i), snew)
        ds = np.abs(snew - s[idx])
        s[idx] = snew
        lo[idx] = lo_i
        hi[idx] = hi_i
        done = (ds < 1e-15) | (hi_i - lo_i < 1e-15)
        active[idx[done]] = False
    c, _, _ = _hermite(P, T, k0, k1, step, s)
    return s, np.sum((c - Y) ** 2, axis=-1)


def hermite_project(P, T, step, closed, Y, seeds, reach=2):
    m = len(P)
    nseg = m if closed else m - 1
    n = len(Y)
    best = np.full(n, 1e300)
    seg = np.zeros(n, dtype=np.int64)
    sbest = np.zeros(n)
    for j in range(-reach, reach):
        k = seeds + j
        if closed:
            k0 = np.mod(k, nseg)
            valid = np.ones(n, dtype=bool)
        else:
            valid = (k >= 0) & (k < nseg)
            k0 = np.clip(k, 0, nseg - 1)
        k1 = (k0 + 1) % m
        s, val = _segment_min(P, T, k0, k1, step, Y)
        better = valid & (val < best)
        best = np.where(better, val, best)
        seg = np.where(better, k0, seg)
        sbest = np.where(better, s, sbest)
    return seg, sbest, best


def sample_scan(P, closed, Y, chunk=256):
    m = len(P)
    n = len(Y)
    i1 = np.empty(n, dtype=np.int64)
    i2 = np.empty(n, dtype=np.int64)
    d1 = np.empty(n)
    d2 = np.empty(n)
    if closed:
        km = np.roll(np.arange(m), 1)
        kp = np.roll(np.arange(m), -1)
    else:
        km = np.maximum(np.arange(m) - 1, 0)
        kp = np.minimum(np.arange(m) + 1, m - 1)
    for a in range(0, n, chunk):
        yq = Y[a:a + chunk]
        dist = np.sqrt(((P[None, :, :] - yq[:, None, :]) ** 2).sum(-1))
        is_min = (dist <= dist[:, km]) & (dist <= dist[:, kp])
        plateau = (dist == dist[:, km]) & (km != np.arange(m))[None, :]
        is_min &= ~plateau
        masked = np.where(is_min, dist, np.inf)
        order = np.argsort(masked, axis=1, kind="stable")[:, :2]
        rows = np.arange(len(yq))
        i1[a:a + chunk] = order[:, 0]
        d1[a:a + chunk] = masked[rows, order[:, 0]]
        if m > 1:
            second = masked[rows, order[:, 1]]
            i2[a:a + chunk] = np.where(np.isfinite(second), order[:, 1], -1)
            d2[a:a + chunk] = np.where(np.isfinite(second), second, 1e300)
        else:
            i2[a:a + chunk] = -1
            d2[a:a + chunk] = 1e300
    return i1, d1, i2, d2


def halfplane_fraction(d, nx, ny, side):
    a = np.abs(nx) * side
    b = np.abs(ny) * side
    a, b = np.minimum(a, b), np.maximum(a, b)
    z = -np.asarray(d, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lower = (z + (a + b) / 2) ** 2 / (2 * a * b)
        middle = (z + b / 2) / b
        upper = 1.0 - ((a + b) / 2 - z) ** 2 / (2 * a * b)
    out = np.where(z <= -(b - a) / 2, lower, np.where(z <= (b - a) / 2, middle, upper))
    out = np.where(a < 1e-14 * side, middle, out)
    out = np.where(z <= -(a + b) / 2, 0.0, out)
    out = np.where(z >= (a + b) / 2, 1.0, out)
    return out
