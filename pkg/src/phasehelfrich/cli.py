"""Command line: ``phasehelfrich <subcommand> SCENARIO [--out DIR] [--threads N] [--strict] [--seed N]``.

Every run writes its outputs plus ``manifest.json`` (scenario hash, version,
seed, thread count, wall time and a SHA-256 per output file) to the output
directory.  Exit status: 0 ok, 1 invalid scenario, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from . import parallel
from .critical import minimize, minimize_two_patch
from .energy import total_energy
from .errors import NaNEncountered, NotConverged, PhaseHelfrichError, ScenarioError
from .reach import min_reach, signed_distance_with_gradient
from .scenario import Scenario
from .testfn import bump, build_phi, partition_of_unity, trig_mode
from .variation import SMOOTH, TestFunction, boundary_functional, fd_first_variation, first_variation
from .verify import (
    PREFACTOR_AUDIT,
    refinement_study,
    residual_csv_rows,
    solve_level,
)

log = logging.getLogger("phasehelfrich")

SUBCOMMANDS = ("energy", "variation-check", "distance-check", "minimize", "verify", "refine")


def tool_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:  # pragma: no cover - running from a source tree
        return "0+unknown"


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class Outputs:
    """Collects files written into the output directory for the manifest."""

    def __init__(self, root: Path):
        self.root = root
        root.mkdir(parents=True, exist_ok=True)
        self.files: dict[str, str] = {}

    def write_text(self, name: str, text: str) -> Path:
        path = self.root / name
        data = text.encode()
        path.write_bytes(data)
        self.files[name] = _sha256(data)
        return path

    def write_csv(self, name: str, rows) -> Path:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for row in rows:
            w.writerow(row)
        return self.write_text(name, buf.getvalue())

    def write_json(self, name: str, obj) -> Path:
        return self.write_text(name, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")

    def register(self, name: str) -> None:
        self.files[name] = _sha256((self.root / name).read_bytes())


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


# ------------------------------------------------------------------ subcommands


def cmd_energy(sc: Scenario, out: Outputs, args) -> dict:
    prob = sc.problem()
    br = total_energy(prob.initial, prob.curve, prob.params).as_dict()
    out.write_json("energy.json", br)
    keys = list(br)
    out.write_csv("energy.csv", [keys, [repr(float(br[k])) for k in keys]])
    print(json.dumps(br, sort_keys=True))
    print(",".join(keys))
    print(",".join(repr(float(br[k])) for k in keys))
    return {"total": br["total"]}


def _random_test_functions(sc: Scenario, disc, rng: np.random.Generator, n: int):
    """Random smooth perturbations; C^1 test functions vanishing on E when a curve is present."""
    curve = sc.curve()
    xmin, xmax, ymin, ymax = disc.grid.domain.bbox()
    lo, hi = np.array([xmin, ymin]), np.array([xmax, ymax])
    span = float(np.min(hi - lo))
    part = partition_of_unity(curve) if curve is not None else None
    funcs = []
    for _ in range(n):
        amp = rng.uniform(0.5, 1.5)
        kx, ky = rng.uniform(-4, 4, size=2)
        mode = trig_mode(amp, kx, ky, rng.uniform(0, 2 * np.pi))
        if curve is not None:
            funcs.append(("C1_PHI", build_phi(mode, curve, part, disc)))
        else:
            centre = 0.5 * (lo + hi) + rng.uniform(-0.15, 0.15, size=2) * span
            fn = mode.times(bump(centre, 0.3 * span))
            funcs.append((SMOOTH, TestFunction.sample(disc, fn, SMOOTH)))
    return funcs


def cmd_variation_check(sc: Scenario, out: Outputs, args) -> dict:
    prob = sc.problem()
    fld, curve, params = prob.initial, prob.curve, prob.params
    checks = sc.data.get("checks", {})
    rng = np.random.default_rng(args.seed)
    rows = [["scenario", "analytic", "fd", "abs_err", "rel_err"]]
    worst = 0.0
    for k, (tag, phi) in enumerate(_random_test_functions(sc, fld.disc, rng, int(checks.get("n_tests", 5)))):
        a = first_variation(fld, curve, phi, params)
        f = fd_first_variation(fld, curve, phi, params, t=float(checks.get("fd_step", 1e-6)), richardson=True)
        err = abs(a - f)
        rel = err / max(abs(f), 1e-300)
        worst = max(worst, err / max(1e-6, 1e-3 * abs(f)))
        rows.append([f"{sc.name}#{k}:{tag}", repr(a), repr(f), repr(err), repr(rel)])
    out.write_csv("variation_check.csv", rows)
    return {"worst_tolerance_ratio": worst}


def _band_points(curve, rng: np.random.Generator, n: int) -> np.ndarray:
    delta = min_reach(curve)
    k = rng.integers(0, curve.n_samples, size=n)
    off = rng.uniform(-0.5, 0.5, size=n) * delta
    return np.asarray(curve.points)[k] + off[:, None] * np.asarray(curve.normals)[k]


def cmd_distance_check(sc: Scenario, out: Outputs, args) -> dict:
    curve = sc.curve()
    if curve is None:
        raise ScenarioError("curve: distance-check needs a contact curve")
    checks = sc.data.get("checks", {})
    rng = np.random.default_rng(args.seed)
    Y = _band_points(curve, rng, int(checks.get("n_points", 1000)))
    d, g = signed_distance_with_gradient(curve, Y)
    step = 1e-5
    fd = np.zeros_like(g)
    for a in range(2):
        e = np.zeros(2)
        e[a] = step
        fd[:, a] = (signed_distance_with_gradient(curve, Y + e)[0] - signed_distance_with_gradient(curve, Y - e)[0]) / (2 * step)
    err = np.linalg.norm(g - fd, axis=1)
    rows = [["y_x", "y_y", "d_pm", "grad_x", "grad_y", "fd_grad_x", "fd_grad_y", "err"]]
    for k in range(len(Y)):
        rows.append([repr(float(v)) for v in (Y[k, 0], Y[k, 1], d[k], g[k, 0], g[k, 1], fd[k, 0], fd[k, 1], err[k])])
    out.write_csv("distance_check.csv", rows)
    return {"max_grad_error": float(err.max())}


def _report_dict(rep) -> dict:
    d = rep.to_dict()
    d["energy_history"] = [float(v) for v in d["energy_history"]]
    return d


def cmd_minimize(sc: Scenario, out: Outputs, args) -> dict:
    if sc.coupling == "C0":
        f0, f1, rep = minimize_two_patch(sc, strict=args.strict)
        f0.to_csv(out.root / "field0.csv")
        f1.to_csv(out.root / "field1.csv")
        out.register("field0.csv")
        out.register("field1.csv")
    else:
        fld, rep = minimize(sc, strict=args.strict)
        fld.to_csv(out.root / "field.csv")
        out.register("field.csv")
    out.write_json("report.json", _report_dict(rep))
    return {"converged": rep.converged, "iterations": rep.iterations, "final_gradient_norm": rep.final_gradient_norm}


def _boundary_checks(sc: Scenario, fld, rng: np.random.Generator, n: int = 3) -> list:
    curve = sc.curve()
    part = partition_of_unity(curve)
    vals = []
    for _ in range(n):
        mode = trig_mode(1.0, *rng.uniform(-3, 3, size=2), rng.uniform(0, 2 * np.pi))
        phi = build_phi(mode, curve, part, fld.disc)
        vals.append(boundary_functional(fld, curve, phi, sc.params))
    return vals


def cmd_verify(sc: Scenario, out: Outputs, args) -> dict:
    lvl = solve_level(sc, mode=sc.coupling, do_minimize=not args.no_minimize, strict=args.strict)
    out.write_csv("residuals.csv", residual_csv_rows(lvl))
    summary = {
        "h": lvl.h,
        "mode": sc.coupling,
        "orientation": sc.orientation,
        "max_residual": lvl.max_residual,
        "median_residual": lvl.median_residual,
        "max_residual_per_side": lvl.max_residual_side,
        "energy": lvl.energy,
        "gradient_norm": lvl.gradient_norm,
        "converged": lvl.converged,
        "iterations": lvl.iterations,
        "n_samples": lvl.n_samples,
        "prefactor_violations": PREFACTOR_AUDIT["violations"],
    }
    if sc.coupling == "C1":
        summary["boundary_functional"] = _boundary_checks(sc, lvl.solution, np.random.default_rng(args.seed))
    out.write_json("verify.json", summary)
    return {"max_residual": lvl.max_residual, "converged": lvl.converged}


def cmd_refine(sc: Scenario, out: Outputs, args) -> dict:
    levels = args.levels or sc.levels
    table = refinement_study(sc, levels, do_minimize=not args.no_minimize)
    out.write_csv("refinement.csv", table.csv_rows())
    for lvl in table.rows:
        out.write_csv(f"residuals_n{round(1.0 / lvl.h)}.csv", residual_csv_rows(lvl))
    summary = table.summary()
    summary["orientation"] = sc.orientation
    out.write_json("refinement.json", summary)
    if args.strict and not all(r.converged for r in table.rows):
        raise NotConverged("a refinement level did not converge", None)
    return {"rate": summary["rate"], "ratios": summary["ratios"]}


HANDLERS = {
    "energy": cmd_energy,
    "variation-check": cmd_variation_check,
    "distance-check": cmd_distance_check,
    "minimize": cmd_minimize,
    "verify": cmd_verify,
    "refine": cmd_refine,
}


# ------------------------------------------------------------------ entry points


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phasehelfrich", description="Phase-dependent Helfrich energy of graphs.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("scenario", type=Path)
        p.add_argument("--out", type=Path, default=None, help="output directory (default out/<name>-<command>)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for batched kernels")
        p.add_argument("--strict", action="store_true", help="treat non-convergence as failure")
        p.add_argument("--seed", type=int, default=None, help="overrides the scenario seed")
        p.add_argument("-v", "--verbose", action="count", default=0)
        if name in ("verify", "refine"):
            p.add_argument("--no-minimize", action="store_true", help="evaluate the initial field (negative control)")
        if name == "refine":
            p.add_argument("--levels", type=int, nargs="+", default=None, help="grid sizes n = 1/h")
    return ap


def run(command: str, scenario_path, argv_flags: list[str] | None = None) -> int:
    """Programmatic entry: same as ``main([command, scenario_path, *flags])``."""
    return main([command, str(scenario_path), *(argv_flags or [])])


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        sc = Scenario.load(args.scenario)
    except ScenarioError as exc:
        print(f"{args.scenario}: {exc}", file=sys.stderr)
        return 1
    if args.seed is None:
        args.seed = sc.seed
    out = Outputs(args.out or Path("out") / f"{sc.name}-{args.command}")
    parallel.set_workers(args.threads)
    status, info, error = 0, {}, None
    try:
        info = HANDLERS[args.command](sc, out, args)
    except ScenarioError as exc:
        status, error = 1, str(exc)
    except NotConverged as exc:
        status, error = 2, f"not converged: {exc}"
    except (NaNEncountered, PhaseHelfrichError, FloatingPointError) as exc:
        status, error = 2, f"{type(exc).__name__}: {exc}"
    if error is not None:
        print(f"{args.scenario}: {error}", file=sys.stderr)
    manifest = {
        "command": args.command,
        "scenario": str(args.scenario),
        "scenario_sha256": _sha256(Path(args.scenario).read_bytes()),
        "tool_version": tool_version(),
        "seed": args.seed,
        "threads": args.threads,
        "strict": bool(args.strict),
        "wall_time_s": time.perf_counter() - t0,
        "exit_status": status,
        "error": error,
        "result": info,
        "files": dict(sorted(out.files.items())),
    }
    (out.root / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
