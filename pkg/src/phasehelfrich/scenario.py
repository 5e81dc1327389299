"""Scenario files: JSON validated against a shipped schema, plus a tiny
arithmetic expression language for boundary and initial data.

Expressions use ``x``, ``y``, numbers, ``pi``, ``e``, ``+ - * / ^`` (or
``**``) and ``sqrt``, ``sin``, ``cos``, ``exp``.  They are parsed with the
standard ``ast`` module and evaluated by walking a whitelisted tree.
"""
from __future__ import annotations

import ast
import copy
import json
import math
import operator
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .critical import Problem, jacobi_fill
from .curve import ContactCurve, circle_curve, ellipse_curve, read_curve_csv, resample_arclength, segment_curve
from .energy import HelfrichParams
from .errors import ScenarioError
from .surface import Discretization, Domain, Grid, ScalarField

# ------------------------------------------------------------------ expressions

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"sqrt": np.sqrt, "sin": np.sin, "cos": np.cos, "exp": np.exp}
_CONSTS = {"pi": math.pi, "e": math.e}
_VARS = ("x", "y")


class Expression:
    """Compiled scalar expression in x and y."""

    def __init__(self, text: str):
        self.text = str(text)
        try:
            tree = ast.parse(self.text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ScenarioError(f"cannot parse expression {self.text!r}: {exc.msg}") from None
        self._check(tree.body)
        self._tree = tree.body

    def _check(self, node) -> None:
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise ScenarioError(f"non-numeric literal in {self.text!r}")
        elif isinstance(node, ast.Name):
            if node.id not in _VARS and node.id not in _CONSTS:
                raise ScenarioError(f"unknown name {node.id!r} in {self.text!r}")
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise ScenarioError(f"operator not allowed in {self.text!r}")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if type(node.op) not in _UNARY:
                raise ScenarioError(f"operator not allowed in {self.text!r}")
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
                raise ScenarioError(f"function not allowed in {self.text!r}")
            if len(node.args) != 1 or node.keywords:
                raise ScenarioError(f"{node.func.id} takes exactly one argument")
            self._check(node.args[0])
        else:
            raise ScenarioError(f"unsupported syntax in {self.text!r}")

    def _eval(self, node, env):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return env[node.id] if node.id in env else _CONSTS[node.id]
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            return _UNARY[type(node.op)](self._eval(node.operand, env))
        return _FUNCS[node.func.id](self._eval(node.args[0], env))

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            out = self._eval(self._tree, {"x": x, "y": y})
        return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(x, y).shape).copy()


def scalar_source(cfg) -> Expression:
    """Number or expression text as an Expression."""
    return Expression(repr(float(cfg)) if isinstance(cfg, (int, float)) else cfg)


# ------------------------------------------------------------------ validation


def load_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("schema/scenario.schema.json").read_text())


def _line_of(text: str, path) -> int:
    """Best-effort line of the JSON key reached by following ``path``."""
    pos = 0
    for key in path:
        if not isinstance(key, str):
            continue
        m = re.compile(r'"' + re.escape(key) + r'"\s*:').search(text, pos)
        if m is None:
            break
        pos = m.start()
    return text.count("\n", 0, pos) + 1


def _format_error(err: jsonschema.ValidationError, text: str | None) -> str:
    path = list(err.absolute_path)
    where = "/".join(str(p) for p in path) or "<root>"
    msg = err.message
    if err.validator == "required":
        missing = [k for k in err.validator_value if k not in (err.instance or {})]
        if missing:
            msg = f"missing required field '{missing[0]}'"
    prefix = f"line {_line_of(text, path)}: " if text is not None else ""
    return f"{prefix}{where}: {msg}"


def validate(data: dict, text: str | None = None) -> None:
    validator = jsonschema.Draft202012Validator(load_schema())
    err = jsonschema.exceptions.best_match(validator.iter_errors(data))
    if err is not None:
        raise ScenarioError(_format_error(err, text))


# ------------------------------------------------------------------ scenario


@dataclass(frozen=True, eq=False)
class Scenario:
    data: dict
    source: Path | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- construction
    @classmethod
    def from_dict(cls, data: dict, source=None, text: str | None = None) -> "Scenario":
        validate(data, text)
        sc = cls(copy.deepcopy(data), Path(source) if source is not None else None)
        sc._check_files()
        return sc

    @classmethod
    def load(cls, path) -> "Scenario":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario {path}: {exc.strerror}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"line {exc.lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(data, dict):
            raise ScenarioError("line 1: <root>: scenario must be a JSON object")
        return cls.from_dict(data, path, text)

    def _resolve(self, name: str) -> Path:
        p = Path(name)
        if not p.is_absolute() and self.source is not None:
            p = self.source.parent / p
        return p

    def _check_files(self) -> None:
        refs = []
        cur = self.data.get("curve", {})
        if cur.get("type") == "csv":
            if "path" not in cur:
                raise ScenarioError("curve: csv curves need a 'path'")
            refs.append(("curve/path", cur["path"]))
        init = self.data.get("initial_field")
        if isinstance(init, dict):
            refs.append(("initial_field/csv", init["csv"]))
        for where, name in refs:
            if not self._resolve(name).is_file():
                raise ScenarioError(f"{where}: file not found: {name}")
        for key in ("boundary_data",):
            if isinstance(self.data.get(key), str):
                Expression(self.data[key])
        if isinstance(init, str) and init != "harmonic":
            Expression(init)

    def with_n(self, n: int) -> "Scenario":
        data = copy.deepcopy(self.data)
        data["grid"] = {"n": int(n)}
        return Scenario(data, self.source)

    def with_h(self, h: float) -> "Scenario":
        data = copy.deepcopy(self.data)
        data["grid"] = {"h": float(h)}
        return Scenario(data, self.source)

    # -- pieces
    @property
    def name(self) -> str:
        if "name" in self.data:
            return self.data["name"]
        return self.source.stem if self.source is not None else "scenario"

    @property
    def h(self) -> float:
        g = self.data["grid"]
        return float(g["h"]) if "h" in g else 1.0 / int(g["n"])

    @property
    def seed(self) -> int:
        return int(self.data.get("seed", 0))

    @property
    def params(self) -> HelfrichParams:
        p = self.data["params"]
        return HelfrichParams(
            float(p["h0_phase0"]),
            float(p["h0_phase1"]),
            float(p["sigma"]),
            float(p.get("lambda_area", 0.0)),
            float(p.get("lambda_volume", 0.0)),
        )

    @property
    def coupling(self) -> str:
        return self.data.get("solver", {}).get("coupling", "C1")

    @property
    def orientation(self) -> str:
        return self.data.get("curve", {}).get("orientation", "outward")

    @property
    def levels(self) -> list[int]:
        return list(self.data.get("refine", {}).get("levels", [64, 128, 256]))

    def domain(self) -> Domain:
        d = self.data["domain"]
        if d["type"] == "disc":
            return Domain.disc(float(d["radius"]), tuple(d.get("center", (0.0, 0.0))))
        return Domain.rectangle(*(float(v) for v in d["extents"]))

    def curve(self) -> ContactCurve | None:
        if "curve" not in self._cache:
            self._cache["curve"] = self._build_curve()
        return self._cache["curve"]

    def _build_curve(self) -> ContactCurve | None:
        cfg = self.data.get("curve")
        if cfg is None:
            return None
        kind = cfg["type"]
        h = self.h

        def count(length: float) -> int:
            return int(cfg.get("n_samples", max(128, math.ceil(2.0 * length / h))))

        need = {"circle": ("radius",), "ellipse": ("semi_axes",), "segment": ("start", "end"), "polyline": ("points",)}
        for key in need.get(kind, ()):
            if key not in cfg:
                raise ScenarioError(f"curve: {kind} curves need '{key}'")
        center = cfg.get("center", (0.0, 0.0))
        if kind == "circle":
            cur = circle_curve(center, cfg["radius"], count(2 * math.pi * cfg["radius"]))
        elif kind == "ellipse":
            a, b = cfg["semi_axes"]
            perim = math.pi * (3 * (a + b) - math.sqrt((3 * a + b) * (a + 3 * b)))
            cur = ellipse_curve(center, (a, b), count(perim))
        elif kind == "segment":
            p0, p1 = np.asarray(cfg["start"], float), np.asarray(cfg["end"], float)
            cur = segment_curve(p0, p1, count(float(np.linalg.norm(p1 - p0))))
        else:
            pts = np.asarray(cfg["points"], float) if kind == "polyline" else read_curve_csv(self._resolve(cfg["path"]))
            closed = bool(cfg.get("closed", True))
            seg = np.diff(np.vstack([pts, pts[:1]]) if closed else pts, axis=0)
            cur = resample_arclength(pts, closed, count(float(np.linalg.norm(seg, axis=1).sum())), cfg.get("max_curvature"))
        orient = self.orientation
        if cur.closed and orient != "as_given":
            inward = cur.signed_area() > 0  # rot90(tangent) points inside for counter-clockwise curves
            if inward == (orient == "outward"):
                cur = cur.flipped()
        return cur

    def discretization(self) -> Discretization:
        if "disc" not in self._cache:
            grid = Grid.from_domain(self.domain(), self.h)
            self._cache["disc"] = Discretization(grid, self.curve())
        return self._cache["disc"]

    def boundary_field(self) -> ScalarField:
        disc = self.discretization()
        X, Y = disc.grid.coords()
        vals = scalar_source(self.data.get("boundary_data", 0.0))(X, Y)
        return ScalarField(disc, np.where(disc.grid.domain_mask, 0.0, vals))

    def initial_field(self) -> ScalarField:
        disc = self.discretization()
        base = self.boundary_field()
        init = self.data.get("initial_field", "harmonic")
        if init == "harmonic":
            return jacobi_fill(base)
        if isinstance(init, dict):
            vals = _read_field_csv(self._resolve(init["csv"]), disc.grid)
        else:
            X, Y = disc.grid.coords()
            vals = scalar_source(init)(X, Y)
        return base.with_values(np.where(disc.grid.domain_mask, vals, base.values))

    def problem(self) -> Problem:
        s = self.data.get("solver", {})
        return Problem(
            self.initial_field(),
            self.curve(),
            self.params,
            tol=s.get("tol"),
            max_iters=int(s.get("max_iters", 50)),
            coupling=float(s.get("penalty", 1.0)),
        )

    def to_problem(self) -> Problem:
        return self.problem()


def _read_field_csv(path: Path, grid: Grid) -> np.ndarray:
    """Field CSV with columns i,j,x,y,u[,phase]; nodes not listed stay 0."""
    vals = np.zeros(grid.shape)
    raw = np.genfromtxt(path, delimiter=",", names=True)
    i = raw["i"].astype(int)
    j = raw["j"].astype(int)
    if i.min() < 0 or j.min() < 0 or i.max() >= grid.nx or j.max() >= grid.ny:
        raise ScenarioError(f"{path}: node indices do not fit the grid")
    vals[i, j] = raw["u"]
    return vals


def load_scenario(path) -> Scenario:
    return Scenario.load(path)


__all__ = ["Expression", "Scenario", "load_scenario", "load_schema", "scalar_source", "validate"]
