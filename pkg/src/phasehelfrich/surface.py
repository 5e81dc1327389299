"""Grid discretisation of a graph height u over a planar domain.

Nodes are stored as ``(nx, ny)`` arrays indexed ``[i, j]`` with
``x = origin_x + i h`` and ``y = origin_y + j h``; flattened index ``i * ny + j``.
Nodes outside the domain form Dirichlet layers that hold boundary data.

Near the contact curve E the field is differentiated one side at a time: a
node jet for side ``s`` is a weighted least-squares cubic fit through side-``s``
nodes only, so the kink of a C^1 field across E never enters a stencil.
Everything that maps node values to jets is a sparse linear operator.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import ceil, factorial

import numpy as np
import scipy.sparse as sp

from . import kernels, parallel
from .curve import ContactCurve
from .errors import CurveTooClose, InsufficientStencil
from .reach import project_points, signed_distance_with_gradient

A0, A1, NEAR_E = 0, 1, 2

JET_NAMES = ("v", "x", "y", "xx", "xy", "yy", "xxx", "xxy", "xyy", "yyy")
ENERGY_COMPONENTS = JET_NAMES[:6]
_POWERS = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)]
_ORDER = np.array([p + q for p, q in _POWERS])
_FACT = np.array([factorial(p) * factorial(q) for p, q in _POWERS], dtype=float)

FIT_RADIUS = 4.0  # least-squares cloud radius, in grid spacings


def cross_fit_radius(dist_over_h):
    """Cloud radius for a fit centred on an other-side node.

    One extra spacing keeps four same-side columns when E runs along a grid
    line through the centre.
    """
    return FIT_RADIUS + 1.0 + np.abs(dist_over_h)
EXTRAP_OFFSETS = (2, 3, 4)
EXTRAP_WEIGHTS = (6.0, -8.0, 3.0)  # quadratic extrapolation from offsets 2h, 3h, 4h to 0
SUBCELLS = 4


# ---------------------------------------------------------------- domain / grid


def _subcell_centres(xs, ys, h: float):
    sub = (np.arange(SUBCELLS) + 0.5) / SUBCELLS - 0.5
    shape = (xs.size, SUBCELLS, SUBCELLS)
    sx = np.broadcast_to(xs[:, None, None] + h * sub[None, :, None], shape).ravel()
    sy = np.broadcast_to(ys[:, None, None] + h * sub[None, None, :], shape).ravel()
    return sx, sy


@dataclass(frozen=True)
class Domain:
    """Disc or axis-aligned rectangle; ``sdf`` is negative inside."""

    kind: str
    center: tuple = (0.0, 0.0)
    radius: float = 1.0
    extents: tuple = (0.0, 1.0, 0.0, 1.0)

    @staticmethod
    def disc(radius: float, center=(0.0, 0.0)) -> "Domain":
        return Domain("disc", tuple(float(c) for c in center), float(radius))

    @staticmethod
    def rectangle(xmin: float, xmax: float, ymin: float, ymax: float) -> "Domain":
        return Domain("rectangle", extents=(float(xmin), float(xmax), float(ymin), float(ymax)))

    def bbox(self):
        if self.kind == "disc":
            cx, cy = self.center
            r = self.radius
            return cx - r, cx + r, cy - r, cy + r
        return self.extents

    @property
    def area(self) -> float:
        if self.kind == "disc":
            return np.pi * self.radius**2
        x0, x1, y0, y1 = self.extents
        return (x1 - x0) * (y1 - y0)

    def sdf(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if self.kind == "disc":
            return np.hypot(x - self.center[0], y - self.center[1]) - self.radius
        x0, x1, y0, y1 = self.extents
        qx = np.maximum(x0 - x, x - x1)
        qy = np.maximum(y0 - y, y - y1)
        outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
        return np.where((qx > 0) | (qy > 0), outside, np.maximum(qx, qy))

    def cell_fractions(self, x, y, h: float):
        """Area fraction of the squares of side h centred at (x, y) that lies inside."""
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if self.kind == "rectangle":
            x0, x1, y0, y1 = self.extents
            fx = np.clip(np.minimum(x + h / 2, x1) - np.maximum(x - h / 2, x0), 0.0, None) / h
            fy = np.clip(np.minimum(y + h / 2, y1) - np.maximum(y - h / 2, y0), 0.0, None) / h
            return fx * fy
        d = self.sdf(x, y)
        out = (d < 0).astype(float)
        cut = np.abs(d) < h
        if cut.any():
            xs, ys = x[cut], y[cut]
            sx, sy = _subcell_centres(xs, ys, h)
            rx, ry = sx - self.center[0], sy - self.center[1]
            rr = np.maximum(np.hypot(rx, ry), 1e-300)
            frac = kernels.halfplane_fraction(rr - self.radius, rx / rr, ry / rr, h / SUBCELLS)
            out[cut] = frac.reshape(-1, SUBCELLS * SUBCELLS).mean(axis=1)
        return out


@dataclass(frozen=True, eq=False)
class Grid:
    origin: np.ndarray
    h: float
    nx: int
    ny: int
    domain: Domain
    domain_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))
        X, Y = self.coords()
        mask = self.domain.sdf(X, Y) < 0
        mask.setflags(write=False)
        object.__setattr__(self, "domain_mask", mask)

    @classmethod
    def from_domain(cls, domain: Domain, h: float, ghost: int = 4) -> "Grid":
        """Bounding-box grid with ``ghost`` extra Dirichlet layers on every side."""
        if h <= 0:
            raise ValueError("grid spacing must be positive")
        x0, x1, y0, y1 = domain.bbox()
        nx = int(round((x1 - x0) / h)) + 1 + 2 * ghost
        ny = int(round((y1 - y0) / h)) + 1 + 2 * ghost
        return cls(np.array([x0 - ghost * h, y0 - ghost * h]), float(h), nx, ny, domain)

    @property
    def x(self) -> np.ndarray:
        return self.origin[0] + self.h * np.arange(self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.origin[1] + self.h * np.arange(self.ny)

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    @property
    def shape(self):
        return (self.nx, self.ny)

    def coords(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    def flat(self, i, j):
        return np.asarray(i) * self.ny + np.asarray(j)


# ---------------------------------------------------------------- phases


@dataclass(frozen=True, eq=False)
class PhaseLayout:
    """Signed distance, side (0/1) and A0/A1/NEAR_E label of every grid node."""

    grid: Grid
    curve: ContactCurve | None
    dist: np.ndarray
    side: np.ndarray
    labels: np.ndarray


def phase_layout(grid: Grid, curve: ContactCurve | None) -> PhaseLayout:
    shape = grid.shape
    if curve is None:
        zeros = np.zeros(shape)
        side = np.zeros(shape, dtype=np.int8)
        return PhaseLayout(grid, None, zeros, side, side.copy())
    margin = -grid.domain.sdf(curve.points[:, 0], curve.points[:, 1])
    if margin.min() < 4 * grid.h:
        raise CurveTooClose(
            f"contact curve is {margin.min():.4g} from the domain boundary; need at least 4h = {4 * grid.h:.4g}"
        )
    X, Y = grid.coords()
    _, _, lam, dist, _ = project_points(curve, np.stack([X.ravel(), Y.ravel()], axis=1))
    d = np.where(dist <= 1e-13, 0.0, -np.sign(lam) * dist).reshape(shape)
    side = (d > 0).astype(np.int8)
    labels = np.where(d < -2 * grid.h, A0, np.where(d > 2 * grid.h, A1, NEAR_E)).astype(np.int8)
    return PhaseLayout(grid, curve, d, side, labels)


def label_phases(grid: Grid, curve: ContactCurve | None) -> np.ndarray:
    """A0 where d < -2h, A1 where d > 2h, NEAR_E in between (all A0 without a curve)."""
    return phase_layout(grid, curve).labels


# ---------------------------------------------------------------- stencils


def _check_window(grid: Grid, I: np.ndarray, J: np.ndarray) -> None:
    if I.min() < 0 or J.min() < 0 or I.max() >= grid.nx or J.max() >= grid.ny:
        raise InsufficientStencil("least-squares stencil leaves the grid; enlarge the ghost layers")


def ls_fit_rows(grid: Grid, side: np.ndarray, centers, sides, radii):
    """Weighted least-squares cubic jets at arbitrary points from same-side nodes.

    ``radii`` are in grid spacings.  Returns ``(rows, idx)`` with ``rows`` of
    shape (m, 10, K) mapping the node values ``u.ravel()[idx]`` (shape (m, K))
    to the ten jet components of JET_NAMES.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    m = len(centers)
    sides = np.broadcast_to(np.asarray(sides, dtype=np.int8), (m,))
    radii = np.broadcast_to(np.asarray(radii, dtype=float), (m,))
    w = int(ceil(float(radii.max()))) if m else 1
    off = np.arange(-w, w + 1)
    K = off.size * off.size
    h = grid.h
    scale = _FACT / h ** _ORDER

    def work(a, b):
        c = (centers[a:b] - grid.origin) / h
        ic = np.rint(c).astype(np.int64)
        I = (ic[:, 0, None, None] + off[None, :, None]).repeat(off.size, axis=2).reshape(b - a, K)
        J = (ic[:, 1, None, None] + off[None, None, :]).repeat(off.size, axis=1).reshape(b - a, K)
        _check_window(grid, I, J)
        dx = I - c[:, 0, None]
        dy = J - c[:, 1, None]
        r2 = dx * dx + dy * dy
        R2 = radii[a:b, None] ** 2
        mask = (side[I, J] == sides[a:b, None]) & (r2 < R2)
        if (mask.sum(axis=1) < 16).any():
            raise InsufficientStencil("fewer than 16 same-side nodes in a least-squares stencil")
        sw = np.where(mask, 1.0 - r2 / R2, 0.0)  # sqrt of the (1 - r^2/R^2)^2 weight
        V = np.stack([dx**p * dy**q for p, q in _POWERS], axis=-1)
        U, S, Vt = np.linalg.svd(sw[..., None] * V, full_matrices=False)
        if (S[:, -1] < 1e-10 * S[:, 0]).any():
            raise InsufficientStencil("rank-deficient least-squares stencil")
        pinv = np.einsum("mji,mj,mkj->mik", Vt, 1.0 / S, U)
        rows = pinv * sw[:, None, :] * scale[None, :, None]
        return rows, I * grid.ny + J

    parts = parallel.map_chunks(work, m, chunk=256)
    if not parts:
        return np.zeros((0, 10, K)), np.zeros((0, K), dtype=np.int64)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _central_coo(grid: Grid, nodes: np.ndarray):
    """COO triplets (row, col, val) per energy component for 3x3 central stencils."""
    ny, h = grid.ny, grid.h
    r = np.arange(len(nodes))
    one = np.ones(len(nodes))
    st = {
        "v": [(0, 1.0)],
        "x": [(ny, 0.5 / h), (-ny, -0.5 / h)],
        "y": [(1, 0.5 / h), (-1, -0.5 / h)],
        "xx": [(ny, 1 / h**2), (0, -2 / h**2), (-ny, 1 / h**2)],
        "yy": [(1, 1 / h**2), (0, -2 / h**2), (-1, 1 / h**2)],
        "xy": [(ny + 1, 0.25 / h**2), (ny - 1, -0.25 / h**2), (-ny + 1, -0.25 / h**2), (-ny - 1, 0.25 / h**2)],
    }
    out = {}
    for name, taps in st.items():
        out[name] = (
            np.concatenate([r for _ in taps]),
            np.concatenate([nodes + o for o, _ in taps]),
            np.concatenate([c * one for _, c in taps]),
        )
    return out


def _same_side_block(side: np.ndarray, radius: int) -> np.ndarray:
    """True where every node of the (2r+1)^2 block has the node's own side."""
    nx, ny = side.shape
    ok = np.zeros(side.shape, dtype=bool)
    inner = side[radius : nx - radius, radius : ny - radius]
    acc = np.ones(inner.shape, dtype=bool)
    for di in range(-radius, radius + 1):
        for dj in range(-radius, radius + 1):
            acc &= side[radius + di : nx - radius + di, radius + dj : ny - radius + dj] == inner
    ok[radius : nx - radius, radius : ny - radius] = acc
    return ok


# ---------------------------------------------------------------- discretisation


class InterfaceOps:
    """Sparse maps from node values to side-wise jets extended onto curve samples."""

    def __init__(self, grid: Grid, side: np.ndarray, curve: ContactCurve, two_sided: bool):
        self.curve = curve
        self.points = np.asarray(curve.points)
        self.tangents = np.asarray(curve.tangents)
        self.normals = np.asarray(curve.normals)
        ns = curve.n_samples
        w = np.full(ns, curve.step)
        if not curve.closed:
            w[0] = w[-1] = 0.5 * curve.step
        self.weights = w
        self.ext = []
        for s in (0, 1):
            fit_side = s if two_sided else 0
            self.ext.append(extension_operator(grid, side, self.points, self.normals, s, fit_side))

    def jets(self, values: np.ndarray, s: int) -> dict:
        u = values.ravel()
        return {c: self.ext[s][c] @ u for c in JET_NAMES}

    def shared_gradient(self, values: np.ndarray) -> np.ndarray:
        """Average of the two one-sided gradient extensions (equal for C^1 fields)."""
        u = values.ravel()
        gx = 0.5 * (self.ext[0]["x"] @ u + self.ext[1]["x"] @ u)
        gy = 0.5 * (self.ext[0]["y"] @ u + self.ext[1]["y"] @ u)
        return np.stack([gx, gy], axis=1)


def extension_operator(grid: Grid, side: np.ndarray, points, normals, s: int, fit_side: int | None = None) -> dict:
    """Quadratic normal extrapolation of side-``s`` jets onto ``points``.

    Side 0 lies on the ``-normal`` side of the curve.  Jets are fitted at
    ``point -/+ k h normal`` for k = 2, 3, 4 and extrapolated to offset 0.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    fit_side = s if fit_side is None else fit_side
    sgn = -1.0 if s == 0 else 1.0
    m = len(points)
    rows_all, cols_all, vals_all = [], [], []
    for k, wk in zip(EXTRAP_OFFSETS, EXTRAP_WEIGHTS):
        centers = points + sgn * k * grid.h * normals
        rows, idx = ls_fit_rows(grid, side, centers, fit_side, FIT_RADIUS)
        rows_all.append(wk * rows)
        cols_all.append(idx)
    out = {}
    for ci, name in enumerate(JET_NAMES):
        r = np.concatenate([np.repeat(np.arange(m), cols.shape[1]) for cols in cols_all])
        c = np.concatenate([cols.ravel() for cols in cols_all])
        v = np.concatenate([rw[:, ci, :].ravel() for rw in rows_all])
        keep = v != 0.0
        out[name] = sp.csr_matrix((v[keep], (r[keep], c[keep])), shape=(m, grid.n_nodes))
    return out


class Discretization:
    """Quadrature points, jet operators and interface operators of one (grid, curve) pair.

    Quadrature point q is a (node, side) pair carrying the area of the node's
    dual cell that lies in the domain and on that side of E (4x4 sub-cells with
    half-plane fractions).  Cells of exterior nodes are lumped onto the
    innermost in-domain neighbour.
    """

    def __init__(self, grid: Grid, curve: ContactCurve | None = None):
        self.grid = grid
        self.curve = curve
        self.layout = phase_layout(grid, curve)
        self.free = grid.domain_mask.ravel().copy()
        self._build_quadrature()
        self._build_jet_operators()
        self._interfaces: dict[int, tuple[ContactCurve, InterfaceOps]] = {}

    # -- quadrature
    def _build_quadrature(self) -> None:
        g, lay = self.grid, self.layout
        h = g.h
        X, Y = g.coords()
        a_dom = g.domain.cell_fractions(X, Y, h) * h * h
        area = np.zeros((2,) + g.shape)
        side = lay.side
        area[0] = np.where(side == 0, a_dom, 0.0)
        area[1] = np.where(side == 1, a_dom, 0.0)
        if self.curve is not None:
            near = np.abs(lay.dist) < h
            xs, ys = X[near], Y[near]
            sx, sy = _subcell_centres(xs, ys, h)
            d, grad = signed_distance_with_gradient(self.curve, np.stack([sx, sy], axis=1))
            f0 = kernels.halfplane_fraction(d, grad[:, 0], grad[:, 1], h / SUBCELLS)
            f0 = f0.reshape(-1, SUBCELLS * SUBCELLS).mean(axis=1)
            area[0][near] = f0 * a_dom[near]
            area[1][near] = (1.0 - f0) * a_dom[near]
        # lump exterior cells onto the innermost in-domain neighbour
        mask = g.domain_mask
        sdf = g.domain.sdf(X, Y)
        ext_i, ext_j = np.nonzero(~mask & (a_dom > 0))
        for i, j in zip(ext_i, ext_j):
            best, target = np.inf, None
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    ii, jj = i + di, j + dj
                    if 0 <= ii < g.nx and 0 <= jj < g.ny and mask[ii, jj] and sdf[ii, jj] < best:
                        best, target = sdf[ii, jj], (ii, jj)
            if target is None:
                raise InsufficientStencil("exterior cell without an in-domain neighbour")
            for s in (0, 1):
                area[s][target] += area[s][i, j]
                area[s][i, j] = 0.0
        area[:, ~mask] = 0.0
        self.node_area = (area[0] + area[1]).ravel()
        nodes, sides, weights = [], [], []
        for s in (0, 1):
            flat = area[s].ravel()
            idx = np.nonzero(flat > 1e-14 * h * h)[0]
            nodes.append(idx)
            sides.append(np.full(idx.size, s, dtype=np.int8))
            weights.append(flat[idx])
        self.q_node = np.concatenate(nodes)
        self.q_side = np.concatenate(sides)
        self.q_area = np.concatenate(weights)

    # -- jets at quadrature points
    def _build_jet_operators(self) -> None:
        g, lay = self.grid, self.layout
        side_flat = lay.side.ravel()
        central_ok = _same_side_block(lay.side, 1).ravel()
        use_central = central_ok[self.q_node] & (side_flat[self.q_node] == self.q_side)
        nq, N = self.q_node.size, g.n_nodes
        trip = {c: ([], [], []) for c in ENERGY_COMPONENTS}
        qc = np.nonzero(use_central)[0]
        for name, (r, c, v) in _central_coo(g, self.q_node[qc]).items():
            trip[name][0].append(qc[r])
            trip[name][1].append(c)
            trip[name][2].append(v)
        ql = np.nonzero(~use_central)[0]
        self.n_fitted = int(ql.size)
        if ql.size:
            nodes = self.q_node[ql]
            X, Y = g.coords()
            centers = np.stack([X.ravel()[nodes], Y.ravel()[nodes]], axis=1)
            other = side_flat[nodes] != self.q_side[ql]
            radii = np.where(other, cross_fit_radius(lay.dist.ravel()[nodes] / g.h), FIT_RADIUS)
            rows, idx = ls_fit_rows(g, lay.side, centers, self.q_side[ql], radii)
            K = idx.shape[1]
            for ci, name in enumerate(ENERGY_COMPONENTS):
                trip[name][0].append(np.repeat(ql, K))
                trip[name][1].append(idx.ravel())
                trip[name][2].append(rows[:, ci, :].ravel())
        self.ops = {}
        for name, (r, c, v) in trip.items():
            r, c, v = np.concatenate(r), np.concatenate(c), np.concatenate(v)
            keep = v != 0.0
            self.ops[name] = sp.csr_matrix((v[keep], (r[keep], c[keep])), shape=(nq, N))

    def jets(self, values) -> dict:
        u = np.asarray(values, dtype=float).ravel()
        return {c: self.ops[c] @ u for c in ENERGY_COMPONENTS}

    def interface(self, curve: ContactCurve | None = None) -> InterfaceOps:
        """Extension operators onto the samples of ``curve`` (default: the phase curve)."""
        curve = self.curve if curve is None else curve
        if curve is None:
            raise ValueError("no contact curve given")
        hit = self._interfaces.get(id(curve))
        if hit is None or hit[0] is not curve:
            ops = InterfaceOps(self.grid, self.layout.side, curve, two_sided=self.curve is not None)
            self._interfaces[id(curve)] = (curve, ops)
            return ops
        return hit[1]


# ---------------------------------------------------------------- fields and jets


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Grid values of u together with the discretisation that labels them."""

    disc: Discretization
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(self.disc.grid.shape)
        if not np.isfinite(v[self.disc.grid.domain_mask]).all():
            raise ValueError("field values must be finite inside the domain")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def grid(self) -> Grid:
        return self.disc.grid

    @property
    def phase(self) -> np.ndarray:
        return self.disc.layout.labels

    @property
    def curve(self) -> ContactCurve | None:
        return self.disc.curve

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.disc, values)

    @classmethod
    def from_function(cls, disc: Discretization, fn) -> "ScalarField":
        X, Y = disc.grid.coords()
        return cls(disc, np.broadcast_to(np.asarray(fn(X, Y), dtype=float), X.shape))

    def to_csv(self, path) -> None:
        g = self.grid
        X, Y = g.coords()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "x", "y", "u", "phase"])
            for i, j in zip(*np.nonzero(g.domain_mask)):
                w.writerow([i, j, repr(float(X[i, j])), repr(float(Y[i, j])), repr(float(self.values[i, j])), int(self.phase[i, j])])


@dataclass(frozen=True)
class OneSidedJet:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    third: np.ndarray
    side: int


def jet_from_components(comp, side: int) -> OneSidedJet:
    v, x, y, xx, xy, yy, xxx, xxy, xyy, yyy = (float(c) for c in comp)
    hess = np.array([[xx, xy], [xy, yy]])
    third = np.empty((2, 2, 2))
    for a in range(2):
        for b in range(2):
            for c in range(2):
                third[a, b, c] = (xxx, xxy, xyy, yyy)[a + b + c]
    return OneSidedJet(v, np.array([x, y]), hess, third, int(side))


def graph_mean_curvature(ux, uy, uxx, uxy, uyy):
    """H = div(grad u / W) expanded, and W = sqrt(1 + |grad u|^2)."""
    W2 = 1.0 + ux * ux + uy * uy
    W = np.sqrt(W2)
    Q = ux * ux * uxx + 2.0 * ux * uy * uxy + uy * uy * uyy
    return (uxx + uyy) / W - Q / (W2 * W), W


def _node_side_rows(f: ScalarField, i: int, j: int, side: int):
    g, lay = f.grid, f.disc.layout
    block = lay.side[max(i - 2, 0) : i + 3, max(j - 2, 0) : j + 3]
    if 2 <= i < g.nx - 2 and 2 <= j < g.ny - 2 and (block == side).all():
        return None
    own = lay.side[i, j] == side
    radius = FIT_RADIUS if own else float(cross_fit_radius(lay.dist[i, j] / g.h))
    return ls_fit_rows(g, lay.side, [[g.x[i], g.y[j]]], side, radius)


def derivatives(field: ScalarField, node, side: int) -> OneSidedJet:
    """Side-``side`` jet (value to third derivatives) at grid node ``(i, j)``.

    Central differences where the 5x5 block is on one side, otherwise a
    weighted least-squares cubic through same-side nodes.
    """
    i, j = (int(v) for v in node)
    fit = _node_side_rows(field, i, j, side)
    if fit is not None:
        rows, idx = fit
        comp = rows[0] @ field.values.ravel()[idx[0]]
        return jet_from_components(comp, side)
    u, h = field.values, field.grid.h
    c = u[i, j]
    ux = (u[i + 1, j] - u[i - 1, j]) / (2 * h)
    uy = (u[i, j + 1] - u[i, j - 1]) / (2 * h)
    uxx = (u[i + 1, j] - 2 * c + u[i - 1, j]) / h**2
    uyy = (u[i, j + 1] - 2 * c + u[i, j - 1]) / h**2
    uxy = (u[i + 1, j + 1] - u[i + 1, j - 1] - u[i - 1, j + 1] + u[i - 1, j - 1]) / (4 * h**2)
    uxxx = (u[i + 2, j] - 2 * u[i + 1, j] + 2 * u[i - 1, j] - u[i - 2, j]) / (2 * h**3)
    uyyy = (u[i, j + 2] - 2 * u[i, j + 1] + 2 * u[i, j - 1] - u[i, j - 2]) / (2 * h**3)
    dy = lambda k: (u[k, j + 1] - u[k, j - 1]) / (2 * h)  # noqa: E731
    dx = lambda k: (u[i + 1, k] - u[i - 1, k]) / (2 * h)  # noqa: E731
    uxxy = (dy(i + 1) - 2 * dy(i) + dy(i - 1)) / h**2
    uxyy = (dx(j + 1) - 2 * dx(j) + dx(j - 1)) / h**2
    return jet_from_components([c, ux, uy, uxx, uxy, uyy, uxxx, uxxy, uxyy, uyyy], side)


def mean_curvature(field: ScalarField, node, side: int) -> float:
    jet = derivatives(field, node, side)
    H, _ = graph_mean_curvature(jet.gradient[0], jet.gradient[1], jet.hessian[0, 0], jet.hessian[0, 1], jet.hessian[1, 1])
    return float(H)


def extend_to_interface(field: ScalarField, curve: ContactCurve, t, side: int):
    """One-sided jet of u and its mean curvature carried onto c(t) from side ``side``.

    Returns ``(jets, H)``; scalars in, a single jet and float out.
    """
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    pts, _, nrm = curve.evaluate(tt)
    fit_side = side if field.disc.curve is not None else 0
    ops = extension_operator(field.grid, field.disc.layout.side, pts, nrm, side, fit_side)
    u = field.values.ravel()
    comp = np.stack([ops[c] @ u for c in JET_NAMES], axis=1)
    H, _ = graph_mean_curvature(comp[:, 1], comp[:, 2], comp[:, 3], comp[:, 4], comp[:, 5])
    jets = [jet_from_components(row, side) for row in comp]
    if scalar:
        return jets[0], float(H[0])
    return jets, H
