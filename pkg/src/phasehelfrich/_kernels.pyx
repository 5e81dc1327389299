# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: closest points on Hermite curves, sample scans, cut fractions.

Every function here has a line-for-line numpy twin in ``_kernels_py``; the two
must agree to rounding.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


cdef inline void _hermite(const double[:, ::1] P, const double[:, ::1] T,
                          Py_ssize_t k0, Py_ssize_t k1, double step, double s,
                          double* c, double* dc, double* ddc) noexcept nogil:
    cdef double s2 = s * s, s3 = s2 * s
    cdef double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s
    cdef double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2
    cdef double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1
    cdef double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s
    cdef double e00 = 12 * s - 6, e10 = 6 * s - 4
    cdef double e01 = -12 * s + 6, e11 = 6 * s - 2
    cdef int a
    for a in range(2):
        c[a] = h00 * P[k0, a] + h10 * step * T[k0, a] + h01 * P[k1, a] + h11 * step * T[k1, a]
        dc[a] = d00 * P[k0, a] + d10 * step * T[k0, a] + d01 * P[k1, a] + d11 * step * T[k1, a]
        ddc[a] = e00 * P[k0, a] + e10 * step * T[k0, a] + e01 * P[k1, a] + e11 * step * T[k1, a]


cdef inline double _g(const double[:, ::1] P, const double[:, ::1] T, Py_ssize_t k0,
                      Py_ssize_t k1, double step, double s, double yx, double yy,
                      double* gp) noexcept nogil:
    cdef double c[2]
    cdef double dc[2]
    cdef double ddc[2]
    _hermite(P, T, k0, k1, step, s, c, dc, ddc)
    cdef double rx = c[0] - yx, ry = c[1] - yy
    gp[0] = dc[0] * dc[0] + dc[1] * dc[1] + ddc[0] * rx + ddc[1] * ry
    return dc[0] * rx + dc[1] * ry


cdef double _segment_min(const double[:, ::1] P, const double[:, ::1] T, Py_ssize_t k0,
                         Py_ssize_t k1, double step, double yx, double yy,
                         double* s_out) noexcept nogil:
    cdef double gp, g0, g1, lo = 0.0, hi = 1.0, s, g, ds, snew
    cdef double c[2]
    cdef double dc[2]
    cdef double ddc[2]
    cdef int it
    g0 = _g(P, T, k0, k1, step, 0.0, yx, yy, &gp)
    g1 = _g(P, T, k0, k1, step, 1.0, yx, yy, &gp)
    if g0 >= 0.0:
        s = 0.0
    elif g1 <= 0.0:
        s = 1.0
    else:
        s = 0.5
        for it in range(60):
            g = _g(P, T, k0, k1, step, s, yx, yy, &gp)
            if g < 0.0:
                lo = s
            else:
                hi = s
            if gp > 0.0:
                snew = s - g / gp
            else:
                snew = 0.5 * (lo + hi)
            if snew <= lo or snew >= hi:
                snew = 0.5 * (lo + hi)
            ds = fabs(snew - s)
            s = snew
            if ds < 1e-15 or hi - lo < 1e-15:
                break
    _hermite(P, T, k0, k1, step, s, c, dc, ddc)
    s_out[0] = s
    return (c[0] - yx) * (c[0] - yx) + (c[1] - yy) * (c[1] - yy)


def hermite_project(const double[:, ::1] P, const double[:, ::1] T, double step, bint closed,
                    const double[:, ::1] Y, const long[::1] seeds, int reach=2):
    """Closest point on the Hermite curve near sample ``seeds[q]`` for every query.

    Returns (segment index, local parameter in [0, 1], squared distance).
    """
    cdef Py_ssize_t m = P.shape[0], n = Y.shape[0], nseg
    nseg = m if closed else m - 1
    seg_out = np.empty(n, dtype=np.int64)
    s_out = np.empty(n, dtype=np.float64)
    d_out = np.empty(n, dtype=np.float64)
    cdef long[::1] seg_v = seg_out
    cdef double[::1] s_v = s_out
    cdef double[::1] d_v = d_out
    cdef Py_ssize_t q, j, k, k0, k1
    cdef double best, val, s
    with nogil:
        for q in range(n):
            best = 1e300
            for j in range(-reach, reach):
                k = seeds[q] + j
                if closed:
                    k0 = ((k % nseg) + nseg) % nseg
                elif k < 0 or k >= nseg:
                    continue
                else:
                    k0 = k
                k1 = (k0 + 1) % m
                val = _segment_min(P, T, k0, k1, step, Y[q, 0], Y[q, 1], &s)
                if val < best:
                    best = val
                    seg_v[q] = k0
                    s_v[q] = s
            d_v[q] = best
    return seg_out, s_out, d_out


def sample_scan(const double[:, ::1] P, bint closed, const double[:, ::1] Y):
    """Distances from each query to all samples; returns the two deepest local minima.

    A local minimum is a sample no farther than both neighbours.  Minima in
    adjacent samples are merged.  Returns (idx1, d1, idx2, d2) with d2 = inf if
    there is only one minimum cluster.
    """
    cdef Py_ssize_t m = P.shape[0], n = Y.shape[0], q, k, km, kp
    i1 = np.empty(n, dtype=np.int64)
    i2 = np.empty(n, dtype=np.int64)
    d1 = np.empty(n, dtype=np.float64)
    d2 = np.empty(n, dtype=np.float64)
    cdef long[::1] i1v = i1, i2v = i2
    cdef double[::1] d1v = d1, d2v = d2
    cdef double[::1] dist = np.empty(m, dtype=np.float64)
    cdef double dx, dy, b1, b2
    cdef long j1, j2
    cdef bint is_min
    with nogil:
        for q in range(n):
            for k in range(m):
                dx = P[k, 0] - Y[q, 0]
                dy = P[k, 1] - Y[q, 1]
                dist[k] = sqrt(dx * dx + dy * dy)
            b1 = 1e300
            b2 = 1e300
            j1 = -1
            j2 = -1
            for k in range(m):
                if closed:
                    km = (k - 1 + m) % m
                    kp = (k + 1) % m
                else:
                    km = k - 1 if k > 0 else k
                    kp = k + 1 if k < m - 1 else k
                is_min = dist[k] <= dist[km] and dist[k] <= dist[kp]
                # plateau of two equal samples: count only the first
                if is_min and dist[k] == dist[km] and km != k:
                    is_min = False
                if not is_min:
                    continue
                if dist[k] < b1:
                    b2 = b1
                    j2 = j1
                    b1 = dist[k]
                    j1 = k
                elif dist[k] < b2:
                    b2 = dist[k]
                    j2 = k
            i1v[q] = j1
            d1v[q] = b1
            i2v[q] = j2
            d2v[q] = b2
    return i1, d1, i2, d2


def halfplane_fraction(const double[::1] d, const double[::1] nx, const double[::1] ny, double side):
    """Area fraction of a square of side ``side`` where d + <n, x - centre> < 0."""
    cdef Py_ssize_t n = d.shape[0], q
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double a, b, z, t
    with nogil:
        for q in range(n):
            a = fabs(nx[q]) * side
            b = fabs(ny[q]) * side
            if a > b:
                t = a
                a = b
                b = t
            z = -d[q]
            if z <= -(a + b) / 2:
                o[q] = 0.0
            elif z >= (a + b) / 2:
                o[q] = 1.0
            elif a < 1e-14 * side:
                o[q] = (z + b / 2) / b
            elif z <= -(b - a) / 2:
                t = z + (a + b) / 2
                o[q] = t * t / (2 * a * b)
            elif z <= (b - a) / 2:
                o[q] = (z + b / 2) / b
            else:
                t = (a + b) / 2 - z
                o[q] = 1.0 - t * t / (2 * a * b)
    return out
