"""Discrete critical points of the graph energy with the phase curve held fixed.

The objective is the discrete total energy, plus (solver only) a quadratic
penalty on the jump of the two one-sided extensions across E:

* ``minimize``: value and normal-derivative jumps (u is C^1 across E);
* ``minimize_two_patch``: value jump only (u is C^0 across E), with the
  weight raised x10 per outer loop until the jump is below 1e-6.

Steps are damped Gauss-Newton directions (the bulk energy is a weighted sum
of squares of H - H0) accepted by Armijo backtracking, so every accepted step
strictly decreases the objective.
"""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp

from .curve import ContactCurve
from .energy import EnergyBreakdown, HelfrichParams, total_energy
from .errors import ConstraintStall, NaNEncountered, NotConverged
from .linsolve import Factor, nested_dissection, pcg
from .surface import ScalarField, cross_fit_radius, graph_mean_curvature, ls_fit_rows

log = logging.getLogger(__name__)

ARMIJO_C = 1e-4
MIN_STEP = 1e-10


@dataclass
class SolveReport:
    iterations: int = 0
    final_gradient_norm: float = float("nan")
    energy_history: list = field(default_factory=list)
    converged: bool = False
    step_stats: dict = field(default_factory=dict)
    outer: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Problem:
    """Everything a solve needs: initial field (Dirichlet values included), curve, parameters."""

    initial: ScalarField
    curve: ContactCurve | None
    params: HelfrichParams
    tol: float | None = None
    max_iters: int = 50
    coupling: float = 1.0

    def tolerance(self) -> float:
        if self.tol is not None:
            return float(self.tol)
        return 1e-8 * int(self.initial.disc.free.sum())


# ------------------------------------------------------------------ objective


def _curvature_partials(ux, uy, uxx, uxy, uyy):
    """H, W and dH/d(ux, uy, uxx, uxy, uyy)."""
    W2 = 1.0 + ux * ux + uy * uy
    W = np.sqrt(W2)
    W3 = W2 * W
    W5 = W3 * W2
    S = uxx + uyy
    Q = ux * ux * uxx + 2 * ux * uy * uxy + uy * uy * uyy
    H = S / W - Q / W3
    dH = {
        "x": -S * ux / W3 - (2 * ux * uxx + 2 * uy * uxy) / W3 + 3 * Q * ux / W5,
        "y": -S * uy / W3 - (2 * uy * uyy + 2 * ux * uxy) / W3 + 3 * Q * uy / W5,
        "xx": 1.0 / W - ux * ux / W3,
        "xy": -2.0 * ux * uy / W3,
        "yy": 1.0 / W - uy * uy / W3,
    }
    return H, W, dH


class Objective:
    """Discrete total energy (+ optional jump penalty) with exact gradient and a PSD Gauss-Newton model."""

    def __init__(self, disc, curve: ContactCurve | None, params: HelfrichParams, penalty: str | None = None, weight: float = 0.0):
        self.disc, self.curve, self.params = disc, curve, params
        self.penalty, self.weight = penalty, float(weight)
        self.h0 = params.h0(disc.q_side)
        self._iface = disc.interface(curve) if curve is not None else None
        if self._iface is not None:
            ops = self._iface
            T = ops.tangents
            gx = 0.5 * (ops.ext[0]["x"] + ops.ext[1]["x"])
            gy = 0.5 * (ops.ext[0]["y"] + ops.ext[1]["y"])
            self.G_t = (sp.diags(T[:, 0]) @ gx + sp.diags(T[:, 1]) @ gy).tocsr()
            n = ops.normals
            self.J_val = (ops.ext[0]["v"] - ops.ext[1]["v"]).tocsr()
            self.J_nrm = (
                sp.diags(n[:, 0]) @ (ops.ext[0]["x"] - ops.ext[1]["x"])
                + sp.diags(n[:, 1]) @ (ops.ext[0]["y"] - ops.ext[1]["y"])
            ).tocsr()
            self.line_w = ops.weights

    # penalty scalings: value jump / h^2 and normal-derivative jump / h, times sqrt(w h)
    def _penalty_rows(self):
        h = self.disc.grid.h
        s = np.sqrt(self.weight * self.line_w * h)
        rows = [sp.diags(s / h**2) @ self.J_val]
        if self.penalty == "c1":
            rows.append(sp.diags(s / h) @ self.J_nrm)
        return rows

    def jump(self, u: np.ndarray) -> float:
        """Largest value jump between the two one-sided extensions on E."""
        if self._iface is None:
            return 0.0
        return float(np.max(np.abs(self.J_val @ u)))

    def value(self, u: np.ndarray):
        field_ = ScalarField(self.disc, u.reshape(self.disc.grid.shape))
        br = total_energy(field_, self.curve, self.params)
        pen = 0.0
        if self.penalty and self._iface is not None and self.weight > 0:
            pen = float(sum(np.sum((R @ u) ** 2) for R in self._penalty_rows()))
        return br.total + pen, br, pen

    def gradient(self, u: np.ndarray, with_model: bool = False):
        """Exact gradient over all nodes; optionally the Gauss-Newton factor J (B = J^T J)."""
        d, p = self.disc, self.params
        jet = d.jets(u)
        ux, uy = jet["x"], jet["y"]
        H, W, dH = _curvature_partials(ux, uy, jet["xx"], jet["xy"], jet["yy"])
        e = H - self.h0
        sa = np.sqrt(d.q_area)
        sW = np.sqrt(W)
        rho = sa * sW * e
        drho = {c: sa * sW * dH[c] for c in dH}
        drho["x"] = drho["x"] + sa * e * ux / (2 * W * sW)
        drho["y"] = drho["y"] + sa * e * uy / (2 * W * sW)
        grad = np.zeros(d.grid.n_nodes)
        for c, v in drho.items():
            grad += d.ops[c].T @ (2.0 * rho * v)
        blocks = []
        if with_model:
            J = sum(sp.diags(np.sqrt(2.0) * v) @ d.ops[c] for c, v in drho.items())
            blocks.append(J)
        if p.lambda_area != 0.0:
            grad += d.ops["x"].T @ (p.lambda_area * d.q_area * ux / W) + d.ops["y"].T @ (p.lambda_area * d.q_area * uy / W)
            if with_model and p.lambda_area > 0:
                g = np.sqrt(ux * ux + uy * uy)
                safe = np.where(g > 0, g, 1.0)
                nx_, ny_ = np.where(g > 0, ux / safe, 1.0), np.where(g > 0, uy / safe, 0.0)
                al, be = W**-0.5, W**-1.5
                sc = np.sqrt(p.lambda_area * d.q_area)
                Dx, Dy = d.ops["x"], d.ops["y"]
                blocks.append(sp.diags(sc * (al * (1 - nx_**2) + be * nx_**2)) @ Dx + sp.diags(sc * (be - al) * nx_ * ny_) @ Dy)
                blocks.append(sp.diags(sc * (be - al) * nx_ * ny_) @ Dx + sp.diags(sc * (al * (1 - ny_**2) + be * ny_**2)) @ Dy)
        if p.lambda_volume != 0.0:
            grad += p.lambda_volume * d.node_area
        if self._iface is not None and p.sigma != 0.0:
            g = self.G_t @ u
            root = np.sqrt(1.0 + g * g)
            grad += self.G_t.T @ (p.sigma * self.line_w * g / root)
            if with_model and p.sigma > 0:
                blocks.append(sp.diags(np.sqrt(p.sigma * self.line_w) / root**1.5) @ self.G_t)
        if self.penalty and self._iface is not None and self.weight > 0:
            for R in self._penalty_rows():
                grad += 2.0 * (R.T @ (R @ u))
                if with_model:
                    blocks.append(np.sqrt(2.0) * R)
        if with_model:
            return grad, sp.vstack(blocks).tocsr()
        return grad


def discrete_gradient(field_: ScalarField, curve: ContactCurve | None, params: HelfrichParams) -> np.ndarray:
    """d(discrete total energy)/d(u_k) for every node k, shaped like the grid."""
    obj = Objective(field_.disc, curve, params)
    return obj.gradient(field_.values.ravel().copy()).reshape(field_.grid.shape)


# ------------------------------------------------------------------ Gauss-Newton driver


def jacobi_fill(initial: ScalarField, sweeps: int = 200) -> ScalarField:
    """Harmonic-ish start: Jacobi sweeps of the 5-point Laplacian with Dirichlet nodes frozen."""
    u = initial.values.copy()
    free = initial.grid.domain_mask
    for _ in range(sweeps):
        avg = u.copy()
        avg[1:-1, 1:-1] = 0.25 * (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2])
        u = np.where(free, avg, u)
    return initial.with_values(u)


class _Stepper:
    def __init__(self, disc):
        self.disc = disc
        self.free_idx = np.nonzero(disc.free)[0]
        g = disc.grid
        i, j = np.divmod(self.free_idx, g.ny)
        self.perm = nested_dissection(i, j)
        self.factor = None
        self.stats = {"factorizations": 0, "cg_iterations": 0, "backtracks": 0, "min_step": 1.0}

    def direction(self, J: sp.csr_matrix, gfree: np.ndarray, mu_rel: float) -> np.ndarray:
        Jf = J[:, self.free_idx]
        B = (Jf.T @ Jf).tocsr()
        diag = B.diagonal()
        mu = mu_rel * float(np.mean(diag))
        B = B + sp.diags(np.full(B.shape[0], mu))
        if self.factor is not None:
            x, its, ok = pcg(B, -gfree, self.factor.solve, rtol=1e-8, maxiter=25)
            self.stats["cg_iterations"] += its
            if ok:
                return x
        self.factor = Factor(B, self.perm)
        self.stats["factorizations"] += 1
        return self.factor.solve(-gfree)


def _descend(obj: Objective, u0: np.ndarray, tol: float, max_iters: int, report: SolveReport, stepper: _Stepper) -> np.ndarray:
    free = obj.disc.free
    u = u0.copy()
    F, _, _ = obj.value(u)
    if not np.isfinite(F):
        raise NaNEncountered("objective is not finite at the initial field")
    report.energy_history.append(F)
    mu_rel = 1e-10
    for it in range(max_iters + 1):
        grad, J = obj.gradient(u, with_model=True)
        gfree = grad[free]
        gnorm = float(np.sqrt(np.sum(gfree * gfree)))
        report.final_gradient_norm = gnorm
        if not np.isfinite(gnorm):
            raise NaNEncountered("gradient is not finite")
        if gnorm <= tol:
            report.converged = True
            return u
        if it == max_iters:
            break
        step = stepper.direction(J, gfree, mu_rel)
        slope = float(np.sum(gfree * step))
        if slope >= 0:  # model not a descent direction: fall back to steepest descent
            step, slope = -gfree, -gnorm * gnorm
        alpha = 1.0
        while True:
            trial = u.copy()
            trial[free] += alpha * step
            Ft, _, _ = obj.value(trial)
            if np.isfinite(Ft) and Ft <= F + ARMIJO_C * alpha * slope and Ft < F:
                break
            alpha *= 0.5
            stepper.stats["backtracks"] += 1
            if alpha < MIN_STEP:
                log.info("line search stalled at gradient norm %.3g", gnorm)
                return u
        stepper.stats["min_step"] = min(stepper.stats["min_step"], alpha)
        mu_rel = max(mu_rel / 10, 1e-14) if alpha == 1.0 else min(mu_rel * 100, 1e-2)
        u, F = trial, Ft
        report.energy_history.append(F)
        report.iterations += 1
        log.debug("iter %d: F=%.12g |g|=%.3g alpha=%g", report.iterations, F, gnorm, alpha)
    return u


def _as_problem(problem) -> Problem:
    """Accept a Problem or anything with a ``problem()`` method (a Scenario)."""
    return problem if isinstance(problem, Problem) else problem.problem()


def minimize(problem, strict: bool = False):
    """Single-field critical point (u C^1 across E).  Returns (field, SolveReport).

    ``problem`` is a Problem or a Scenario.  Without convergence the report
    has ``converged=False``; ``strict=True`` raises NotConverged instead.
    """
    problem = _as_problem(problem)
    t0 = time.perf_counter()
    disc = problem.initial.disc
    obj = Objective(disc, problem.curve, problem.params, penalty="c1" if problem.curve is not None else None, weight=problem.coupling)
    report = SolveReport()
    stepper = _Stepper(disc)
    u = _descend(obj, problem.initial.values.ravel().copy(), problem.tolerance(), problem.max_iters, report, stepper)
    report.step_stats = dict(stepper.stats, seconds=time.perf_counter() - t0, jump=obj.jump(u))
    if strict and not report.converged:
        raise NotConverged(f"gradient norm {report.final_gradient_norm:.3g} above tolerance", report)
    return problem.initial.with_values(u.reshape(disc.grid.shape)), report


def _patch_field(field_: ScalarField, side: int, band: float = 3.0) -> ScalarField:
    """Side-``side`` patch: other-side nodes within ``band`` h of E hold the extrapolated value."""
    d = field_.disc
    lay, g = d.layout, d.grid
    other = (lay.side != side) & (np.abs(lay.dist) < band * g.h)
    vals = field_.values.copy()
    if other.any():
        X, Y = g.coords()
        centers = np.stack([X[other], Y[other]], axis=1)
        radii = cross_fit_radius(lay.dist[other] / g.h)
        rows, idx = ls_fit_rows(g, lay.side, centers, side, radii)
        vals[other] = np.einsum("mk,mk->m", rows[:, 0, :], field_.values.ravel()[idx])
    return field_.with_values(vals)


def minimize_two_patch(problem, strict: bool = False, weight0: float = 1.0, max_outer: int = 10, target: float = 1e-6):
    """C^0 coupling: one node set per side, value continuity by an increasing penalty.

    Returns (field0, field1, SolveReport); ``report.outer`` traces weight and
    jump per outer loop.
    """
    problem = _as_problem(problem)
    if problem.curve is None:
        raise ValueError("two-patch solve needs a contact curve")
    t0 = time.perf_counter()
    disc = problem.initial.disc
    report = SolveReport()
    stepper = _Stepper(disc)
    u = problem.initial.values.ravel().copy()
    weight = weight0
    prev = np.inf
    stalls = 0
    for k in range(max_outer):
        obj = Objective(disc, problem.curve, problem.params, penalty="c0", weight=weight)
        inner = SolveReport()
        u = _descend(obj, u, problem.tolerance(), problem.max_iters, inner, stepper)
        viol = obj.jump(u)
        report.iterations += inner.iterations
        report.energy_history.extend(inner.energy_history)
        report.final_gradient_norm = inner.final_gradient_norm
        report.outer.append({"weight": weight, "jump": viol, "iterations": inner.iterations, "converged": inner.converged})
        if viol < target and inner.converged:
            report.converged = True
            break
        stalls = stalls + 1 if viol > 0.9 * prev else 0
        if stalls >= 2:
            report.step_stats = dict(stepper.stats, seconds=time.perf_counter() - t0)
            raise ConstraintStall(f"continuity violation stalled at {viol:.3g}")
        prev = viol
        weight *= 10.0
    field_ = problem.initial.with_values(u.reshape(disc.grid.shape))
    energy = total_energy(field_, problem.curve, problem.params).total
    report.step_stats = dict(stepper.stats, seconds=time.perf_counter() - t0, jump=report.outer[-1]["jump"], energy=energy)
    if strict and not report.converged:
        raise NotConverged("two-patch solve did not meet its tolerances", report)
    return _patch_field(field_, 0), _patch_field(field_, 1), report


__all__ = [
    "SolveReport",
    "Problem",
    "Objective",
    "discrete_gradient",
    "jacobi_fill",
    "minimize",
    "minimize_two_patch",
]
