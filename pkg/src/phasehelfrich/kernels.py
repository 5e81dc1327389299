"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy twins
run.  Set ``PHASEHELFRICH_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("PHASEHELFRICH_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def use_backend(name: str) -> None:
    """Switch backend at runtime (benchmarks and tests)."""
    global _impl, BACKEND
    if name == "python":
        _impl, BACKEND = _kernels_py, "python"
    elif name == "cython":
        from . import _kernels as _compiled  # type: ignore[attr-defined]

        _impl, BACKEND = _compiled, "cython"
    else:
        raise ValueError(f"unknown backend {name!r}")


def hermite_project(P, T, step, closed, Y, seeds, reach=2):
    return _impl.hermite_project(
        np.ascontiguousarray(P, dtype=float),
        np.ascontiguousarray(T, dtype=float),
        float(step),
        bool(closed),
        np.ascontiguousarray(Y, dtype=float),
        np.ascontiguousarray(seeds, dtype=np.int64),
        int(reach),
    )


def sample_scan(P, closed, Y):
    return _impl.sample_scan(
        np.ascontiguousarray(P, dtype=float), bool(closed), np.ascontiguousarray(Y, dtype=float)
    )


def halfplane_fraction(d, nx, ny, side):
    return _impl.halfplane_fraction(
        np.ascontiguousarray(d, dtype=float),
        np.ascontiguousarray(nx, dtype=float),
        np.ascontiguousarray(ny, dtype=float),
        float(side),
    )
