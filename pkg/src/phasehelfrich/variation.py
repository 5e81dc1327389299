"""First variation of the graph energy and the contact-line boundary functional.

Analytic variations are evaluated with the same jet operators as the energy,
so they are the exact derivative of the discrete energy along the grid
values of the test function.  ``fd_first_variation`` is the independent
finite-difference oracle.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curve import ContactCurve
from .energy import HelfrichParams, _trapezoid_weights, interface_gradient, total_energy
from .errors import PhiNotZeroOnE, StepTooSmall
from .surface import Discretization, ScalarField, derivatives, graph_mean_curvature

SMOOTH, C1_PHI, ONESIDED_PSI = "SMOOTH", "C1_PHI", "ONESIDED_PSI"
_PHI_ON_E_TOL = 1e-9


@dataclass(eq=False)
class TestFunction:
    """A test function sampled on a grid, optionally backed by an exact callable.

    ``fn`` (if given) must be callable on coordinate arrays and provide
    ``grad(points)``; it is used wherever exact values on E are needed.
    """

    __test__ = False  # not a pytest class

    disc: Discretization
    values: np.ndarray
    class_tag: str = SMOOTH
    fn: object | None = None
    gradient: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        g = self.disc.grid
        self.values = np.asarray(self.values, dtype=float).reshape(g.shape)
        if self.gradient is None:
            if self.fn is not None:
                X, Y = g.coords()
                pts = np.stack([X.ravel(), Y.ravel()], axis=1)
                self.gradient = np.asarray(self.fn.grad(pts)).reshape(g.shape + (2,))
            else:
                jet = self.disc.jets(self.values)
                grad = np.zeros(g.shape + (2,))
                own = self.disc.q_side == self.disc.layout.side.ravel()[self.disc.q_node]
                flat = grad.reshape(-1, 2)
                flat[self.disc.q_node[own], 0] = jet["x"][own]
                flat[self.disc.q_node[own], 1] = jet["y"][own]
                self.gradient = grad

    @property
    def support_mask(self) -> np.ndarray:
        return self.values != 0.0

    @classmethod
    def sample(cls, disc: Discretization, fn, class_tag: str = SMOOTH) -> "TestFunction":
        X, Y = disc.grid.coords()
        return cls(disc, np.asarray(fn(X, Y), dtype=float), class_tag, fn)

    def __mul__(self, a: float) -> "TestFunction":
        fn = None if self.fn is None else _Scaled(self.fn, float(a))
        return TestFunction(self.disc, a * self.values, self.class_tag, fn, a * self.gradient)

    __rmul__ = __mul__

    def __add__(self, other: "TestFunction") -> "TestFunction":
        fn = None if self.fn is None or other.fn is None else _Sum(self.fn, other.fn)
        tag = self.class_tag if self.class_tag == other.class_tag else SMOOTH
        return TestFunction(self.disc, self.values + other.values, tag, fn, self.gradient + other.gradient)

    def values_on(self, curve: ContactCurve) -> np.ndarray:
        pts = np.asarray(curve.points)
        if self.fn is not None:
            return np.asarray(self.fn(pts[:, 0], pts[:, 1]), dtype=float)
        ops = self.disc.interface(curve)
        u = self.values.ravel()
        return 0.5 * (ops.ext[0]["v"] @ u + ops.ext[1]["v"] @ u)

    def gradient_on(self, curve: ContactCurve) -> np.ndarray:
        if self.fn is not None:
            return np.asarray(self.fn.grad(np.asarray(curve.points)), dtype=float)
        return self.disc.interface(curve).shared_gradient(self.values)


class _Scaled:
    def __init__(self, f, a):
        self.f, self.a = f, a

    def __call__(self, x, y):
        return self.a * self.f(x, y)

    def grad(self, pts):
        return self.a * self.f.grad(pts)


class _Sum:
    def __init__(self, f, g):
        self.f, self.g = f, g

    def __call__(self, x, y):
        return self.f(x, y) + self.g(x, y)

    def grad(self, pts):
        return self.f.grad(pts) + self.g.grad(pts)


# ------------------------------------------------------------------ delta H


def delta_H_terms(uj: dict, pj: dict):
    """d/dt H(u + t phi) at t = 0 from jets of u and phi (vectorised)."""
    ux, uy, uxx, uxy, uyy = uj["x"], uj["y"], uj["xx"], uj["xy"], uj["yy"]
    px, py, pxx, pxy, pyy = pj["x"], pj["y"], pj["xx"], pj["xy"], pj["yy"]
    W2 = 1.0 + ux * ux + uy * uy
    W = np.sqrt(W2)
    W3 = W2 * W
    W5 = W3 * W2
    lap_u = uxx + uyy
    lap_p = pxx + pyy
    gu_gp = ux * px + uy * py
    Q = ux * ux * uxx + 2 * ux * uy * uxy + uy * uy * uyy
    # sum_ij (d_i phi d_j u + d_i u d_j phi) d_ij u + d_i u d_j u d_ij phi
    mixed = (
        2 * (px * (uxx * ux + uxy * uy) + py * (uxy * ux + uyy * uy))
        + ux * ux * pxx + 2 * ux * uy * pxy + uy * uy * pyy
    )
    return lap_p / W - lap_u * gu_gp / W3 - mixed / W3 + 3 * Q * gu_gp / W5


def delta_H(field: ScalarField, phi: TestFunction, node, side: int) -> float:
    """Variation of the mean curvature at one node from side-``side`` jets."""
    ju = derivatives(field, node, side)
    phi_field = ScalarField(field.disc, phi.values)
    jp = derivatives(phi_field, node, side)

    def as_dict(j):
        return {"x": j.gradient[0], "y": j.gradient[1], "xx": j.hessian[0, 0], "xy": j.hessian[0, 1], "yy": j.hessian[1, 1]}

    return float(delta_H_terms(as_dict(ju), as_dict(jp)))


# ------------------------------------------------------------------ energy variations


def delta_bulk(field: ScalarField, phi: TestFunction, params: HelfrichParams) -> float:
    """sum_q a_q [2 (H - H0) dH W + (H - H0)^2 <grad u, grad phi> / W]."""
    d = field.disc
    uj = d.jets(field.values)
    pj = d.jets(phi.values)
    H, W = graph_mean_curvature(uj["x"], uj["y"], uj["xx"], uj["xy"], uj["yy"])
    e = H - params.h0(d.q_side)
    dH = delta_H_terms(uj, pj)
    gu_gp = uj["x"] * pj["x"] + uj["y"] * pj["y"]
    return float(np.sum(d.q_area * (2 * e * dH * W + e * e * gu_gp / W)))


def delta_line(field, curve: ContactCurve, phi: TestFunction, sigma: float) -> float:
    """Derivative of sigma * lifted length along phi."""
    if sigma == 0.0 or curve is None:
        return 0.0
    g = interface_gradient(field, curve)
    if isinstance(field, ScalarField):
        gp = field.disc.interface(curve).shared_gradient(phi.values)
    else:
        gp = phi.gradient_on(curve)
    T = np.asarray(curve.tangents)
    slope = np.sum(g * T, axis=1)
    dslope = np.sum(gp * T, axis=1)
    return sigma * float(np.sum(_trapezoid_weights(curve) * slope * dslope / np.sqrt(1.0 + slope * slope)))


def delta_area_volume(field: ScalarField, phi: TestFunction, params: HelfrichParams):
    d = field.disc
    da = dv = 0.0
    if params.lambda_area != 0.0:
        uj = d.jets(field.values)
        pj = d.jets(phi.values)
        W = np.sqrt(1.0 + uj["x"] ** 2 + uj["y"] ** 2)
        da = params.lambda_area * float(np.sum(d.q_area * (uj["x"] * pj["x"] + uj["y"] * pj["y"]) / W))
    if params.lambda_volume != 0.0:
        dv = params.lambda_volume * float(np.sum(d.node_area * phi.values.ravel()))
    return da, dv


def first_variation(field: ScalarField, curve: ContactCurve | None, phi: TestFunction, params: HelfrichParams) -> float:
    da, dv = delta_area_volume(field, phi, params)
    return delta_bulk(field, phi, params) + delta_line(field, curve, phi, params.sigma) + da + dv


def fd_first_variation(
    field: ScalarField,
    curve: ContactCurve | None,
    phi: TestFunction,
    params: HelfrichParams,
    t: float = 1e-6,
    richardson: bool = False,
) -> float:
    """Central difference (W(u + t phi) - W(u - t phi)) / 2t of the total energy.

    The estimate at t/2 is always formed; if the two disagree by more than
    10% beyond rounding level the step is rejected with StepTooSmall.
    """
    if t <= 0:
        raise ValueError("step must be positive")

    def central(s):
        ep = total_energy(field.with_values(field.values + s * phi.values), curve, params).total
        em = total_energy(field.with_values(field.values - s * phi.values), curve, params).total
        return (ep - em) / (2 * s), max(abs(ep), abs(em))

    d1, mag1 = central(t)
    d2, mag2 = central(t / 2)
    noise = 100 * np.finfo(float).eps * max(mag1, mag2) / (t / 2)
    if abs(d1 - d2) > max(0.1 * max(abs(d1), abs(d2)), noise):
        raise StepTooSmall(f"estimates at t={t:g} and t/2 differ: {d1:.6g} vs {d2:.6g}")
    if richardson:
        return (4 * d2 - d1) / 3
    return d1


# ------------------------------------------------------------------ boundary functional


def boundary_functional(field: ScalarField, curve: ContactCurve, phi: TestFunction, params: HelfrichParams) -> float:
    """Trapezoid rule along E of the contact-line integrand.

    (<grad phi, n_E> - <n_E, grad u><grad phi, grad u> / W^2)
        * (H_{A0} - H0(0) - (H_{A1} - H0(1)))

    with n_E the curve normal (pointing from A0 into A1).
    """
    vals = phi.values_on(curve)
    worst = float(np.max(np.abs(vals))) if vals.size else 0.0
    if worst > _PHI_ON_E_TOL:
        raise PhiNotZeroOnE(f"test function reaches {worst:.3g} on the contact curve")
    ops = field.disc.interface(curve)
    gu = ops.shared_gradient(field.values)
    gp = phi.gradient_on(curve)
    n = np.asarray(curve.normals)
    W2 = 1.0 + np.sum(gu * gu, axis=1)
    tangential = np.sum(gp * n, axis=1) - np.sum(n * gu, axis=1) * np.sum(gp * gu, axis=1) / W2
    r = jump_from_ops(ops, field.values, params)
    return float(np.sum(_trapezoid_weights(curve) * tangential * r))


def jump_from_ops(ops, values, params: HelfrichParams) -> np.ndarray:
    out = []
    for s in (0, 1):
        j = ops.jets(values, s)
        H, _ = graph_mean_curvature(j["x"], j["y"], j["xx"], j["xy"], j["yy"])
        out.append(H - (params.h0_phase0 if s == 0 else params.h0_phase1))
    return out[0] - out[1]


__all__ = [
    "SMOOTH",
    "C1_PHI",
    "ONESIDED_PSI",
    "TestFunction",
    "delta_H",
    "delta_H_terms",
    "delta_bulk",
    "delta_line",
    "delta_area_volume",
    "first_variation",
    "fd_first_variation",
    "boundary_functional",
]
