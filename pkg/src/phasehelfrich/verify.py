"""Checks of the contact-line conditions on computed fields, and refinement studies.

* jump residual      r(t)   = H_{A0}(c(t)) - H0(0) - (H_{A1}(c(t)) - H0(1))
* one-sided residual r_i(t) = H_{A_i}(c(t)) - H0(i)
* prefactor          1 - <n_E, grad u>^2 / (1 + |grad u|^2)

H_{A_i} is the mean curvature of the side-i jet carried onto the curve by
quadratic normal extrapolation.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .critical import minimize, minimize_two_patch
from .curve import ContactCurve
from .energy import HelfrichParams, total_energy
from .surface import JET_NAMES, ScalarField, extension_operator, graph_mean_curvature

log = logging.getLogger(__name__)

# running tally of prefactor evaluations (value checked against its lower bound)
PREFACTOR_AUDIT = {"evaluated": 0, "violations": 0, "min_margin": math.inf}


def reset_prefactor_audit() -> None:
    PREFACTOR_AUDIT.update(evaluated=0, violations=0, min_margin=math.inf)


def _sample_args(curve: ContactCurve, t):
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float)) if t is not None else np.asarray(curve.t)
    return tt, scalar and t is not None


def _side_jets(field_: ScalarField, curve: ContactCurve, tt: np.ndarray, side: int) -> dict:
    if tt.shape == curve.t.shape and np.array_equal(tt, curve.t):
        ops = field_.disc.interface(curve).ext[side]
    else:
        pts, _, nrm = curve.evaluate(tt)
        fit_side = side if field_.disc.curve is not None else 0
        ops = extension_operator(field_.grid, field_.disc.layout.side, pts, nrm, side, fit_side)
    u = field_.values.ravel()
    return {c: ops[c] @ u for c in JET_NAMES[:6]}


def one_sided_curvature(field_: ScalarField, curve: ContactCurve, t, side: int) -> np.ndarray:
    j = _side_jets(field_, curve, t, side)
    H, _ = graph_mean_curvature(j["x"], j["y"], j["xx"], j["xy"], j["yy"])
    return H


def jump_residual(field_: ScalarField, curve: ContactCurve, params: HelfrichParams, t=None):
    """r at arclength ``t`` (scalar, array, or None for every curve sample)."""
    tt, scalar = _sample_args(curve, t)
    r = (one_sided_curvature(field_, curve, tt, 0) - params.h0_phase0) - (
        one_sided_curvature(field_, curve, tt, 1) - params.h0_phase1
    )
    return float(r[0]) if scalar else r


def one_sided_residual(field_i: ScalarField, curve: ContactCurve, params: HelfrichParams, t=None, side: int = 0):
    tt, scalar = _sample_args(curve, t)
    r = one_sided_curvature(field_i, curve, tt, side) - params.h0(side)
    return float(r[0]) if scalar else np.asarray(r, dtype=float)


def prefactor_from_gradient(grad: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """1 - <n, g>^2 / (1 + |g|^2), formed as (1 + cross(n, g)^2) / (1 + |g|^2).

    For unit n the two agree exactly; the second form never rounds below
    1 / (1 + |g|^2).
    """
    g = np.atleast_2d(np.asarray(grad, dtype=float))
    n = np.atleast_2d(np.asarray(normals, dtype=float))
    n = n / np.linalg.norm(n, axis=1, keepdims=True)
    cross = n[:, 0] * g[:, 1] - n[:, 1] * g[:, 0]
    denom = 1.0 + np.sum(g * g, axis=1)
    val = (1.0 + cross * cross) / denom
    margin = val - 1.0 / denom
    PREFACTOR_AUDIT["evaluated"] += int(val.size)
    PREFACTOR_AUDIT["violations"] += int(np.count_nonzero(margin < 0))
    if val.size:
        PREFACTOR_AUDIT["min_margin"] = min(PREFACTOR_AUDIT["min_margin"], float(margin.min()))
    assert np.all(val > 0), "prefactor must be positive"
    return val


def prefactor(field_, curve: ContactCurve, t=None):
    """Prefactor with grad u averaged over the two one-sided extensions.

    ``field_`` may also be an exact function exposing ``grad(points)``.
    """
    tt, scalar = _sample_args(curve, t)
    pts, _, nrm = curve.evaluate(tt)
    if hasattr(field_, "grad") and not isinstance(field_, ScalarField):
        g = np.asarray(field_.grad(pts), dtype=float)
    else:
        j0 = _side_jets(field_, curve, tt, 0)
        j1 = _side_jets(field_, curve, tt, 1)
        g = 0.5 * np.stack([j0["x"] + j1["x"], j0["y"] + j1["y"]], axis=1)
    val = prefactor_from_gradient(g, nrm)
    return float(val[0]) if scalar else val


# ------------------------------------------------------------------ refinement


def fit_rate(h, err) -> float:
    """Least-squares slope of log err against log h."""
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    ok = (err > 0) & np.isfinite(err)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(h[ok]), np.log(err[ok]), 1)[0])


@dataclass
class LevelResult:
    h: float
    max_residual: float
    median_residual: float
    energy: float
    gradient_norm: float
    converged: bool
    n_samples: int
    iterations: int = 0
    seconds: float = 0.0
    max_residual_side: list = field(default_factory=list)
    residuals: np.ndarray | None = field(default=None, repr=False)
    curve: ContactCurve | None = field(default=None, repr=False)
    solution: object = field(default=None, repr=False)


@dataclass
class RefinementTable:
    rows: list
    mode: str

    def h(self) -> np.ndarray:
        return np.array([r.h for r in self.rows])

    def max_residuals(self) -> np.ndarray:
        return np.array([r.max_residual for r in self.rows])

    def ratios(self) -> np.ndarray:
        m = self.max_residuals()
        return m[1:] / m[:-1]

    def rate(self, use_unconverged: bool = False) -> float:
        rows = [r for r in self.rows if r.converged or use_unconverged]
        return fit_rate([r.h for r in rows], [r.max_residual for r in rows])

    def summary(self) -> dict:
        out = {"mode": self.mode, "rate": self.rate(), "ratios": self.ratios().tolist(), "levels": []}
        for r in self.rows:
            d = asdict(r)
            d.pop("residuals")
            d.pop("curve")
            d.pop("solution")
            out["levels"].append(d)
        return out

    COLUMNS = ("h", "max_residual", "median_residual", "energy", "gradient_norm", "converged")

    def csv_rows(self):
        yield list(self.COLUMNS)
        for r in self.rows:
            yield [repr(r.h), repr(r.max_residual), repr(r.median_residual), repr(r.energy), repr(r.gradient_norm), int(r.converged)]


def _level_curve(curve: ContactCurve, h: float) -> ContactCurve:
    """Evaluation samples: at least perimeter / h of them."""
    need = math.ceil(curve.length / h)
    return curve if curve.n_samples >= need else curve.resampled(need)


def solve_level(scenario, mode: str = "C1", do_minimize: bool = True, strict: bool = False) -> LevelResult:
    """Minimise one scenario (or not, for a negative control) and measure residuals."""
    prob = scenario.problem()
    curve, params = prob.curve, prob.params
    if curve is None:
        raise ValueError("residuals need a contact curve")
    h = scenario.h
    ev = _level_curve(curve, h)
    iters, gnorm, conv, secs = 0, float("nan"), True, 0.0
    if mode == "C0":
        if do_minimize:
            f0, f1, rep = minimize_two_patch(prob, strict=strict)
            iters, gnorm, conv, secs = rep.iterations, rep.final_gradient_norm, rep.converged, rep.step_stats.get("seconds", 0.0)
        else:
            f0 = f1 = prob.initial
        r0 = one_sided_residual(f0, ev, params, side=0)
        r1 = one_sided_residual(f1, ev, params, side=1)
        prefactor(f0, ev)
        res = np.stack([r0, r1], axis=1)
        mags = np.abs(res)
        energy = rep.step_stats["energy"] if do_minimize else total_energy(prob.initial, curve, params).total
        side_max = [float(mags[:, 0].max()), float(mags[:, 1].max())]
        return LevelResult(h, float(mags.max()), float(np.median(mags)), energy, gnorm, conv, ev.n_samples, iters, secs, side_max, res, ev, f0)
    if do_minimize:
        fld, rep = minimize(prob, strict=strict)
        iters, gnorm, conv, secs = rep.iterations, rep.final_gradient_norm, rep.converged, rep.step_stats.get("seconds", 0.0)
    else:
        fld = prob.initial
    r = jump_residual(fld, ev, params)
    prefactor(fld, ev)
    energy = total_energy(fld, curve, params).total
    return LevelResult(h, float(np.max(np.abs(r))), float(np.median(np.abs(r))), energy, gnorm, conv, ev.n_samples, iters, secs, [], r, ev, fld)


def refinement_study(scenario, levels=None, mode: str | None = None, do_minimize: bool = True) -> RefinementTable:
    """Solve at each grid size in ``levels`` (values of n = 1/h, or h < 1) and tabulate residuals.

    Rows are ordered by h descending.  Unconverged rows are kept but flagged
    and left out of the rate fit.
    """
    levels = scenario.levels if levels is None else levels
    mode = mode or scenario.coupling
    hs = sorted((1.0 / v if v >= 1 else float(v) for v in levels), reverse=True)
    rows = []
    for h in hs:
        lvl = solve_level(scenario.with_h(h), mode=mode, do_minimize=do_minimize)
        log.info("h=%g max|r|=%.3e median=%.3e", h, lvl.max_residual, lvl.median_residual)
        rows.append(lvl)
    return RefinementTable(rows, mode)


def residual_csv_rows(level: LevelResult):
    """Per-sample residuals: t, x, y and r (or r0, r1 for the two-patch mode)."""
    cur = level.curve
    res = np.asarray(level.residuals)
    two = res.ndim == 2
    yield ["t", "x", "y"] + (["r0", "r1"] if two else ["r"])
    for k in range(cur.n_samples):
        vals = res[k] if two else [res[k]]
        yield [repr(float(cur.t[k])), repr(float(cur.points[k, 0])), repr(float(cur.points[k, 1]))] + [repr(float(v)) for v in vals]


__all__ = [
    "PREFACTOR_AUDIT",
    "LevelResult",
    "RefinementTable",
    "fit_rate",
    "jump_residual",
    "one_sided_curvature",
    "one_sided_residual",
    "prefactor",
    "prefactor_from_gradient",
    "refinement_study",
    "reset_prefactor_audit",
    "residual_csv_rows",
    "solve_level",
]
