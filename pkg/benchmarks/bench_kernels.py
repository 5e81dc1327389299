"""Compiled vs numpy kernels, with a Gauss-Newton solve for scale.

    python3 benchmarks/bench_kernels.py [--n 256] [--repeat 3]

Prints one line per kernel and backend with the best wall time over the
repeats, then the time spent in one full grid build and one sparse solve
on the two-phase disc at the same resolution.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from phasehelfrich import kernels
from phasehelfrich.critical import Objective, _Stepper
from phasehelfrich.curve import circle_curve
from phasehelfrich.energy import HelfrichParams
from phasehelfrich.reach import project_points
from phasehelfrich.surface import Discretization, Domain, Grid


def best_of(fn, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def kernel_cases(n: int):
    rng = np.random.default_rng(0)
    curve = circle_curve((0.0, 0.0), 0.6, 8 * n).flipped()
    Y = rng.uniform(-1.0, 1.0, size=(n * n, 2))
    sub = rng.uniform(-0.02, 0.02, size=(16 * n * n // 4,))
    nrm = rng.normal(size=(sub.size, 2))
    nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
    return {
        "projection (scan + Hermite Newton)": lambda: project_points(curve, Y),
        "sample_scan": lambda: kernels.sample_scan(curve.points, True, Y[: n * 4]),
        "halfplane_fraction": lambda: kernels.halfplane_fraction(sub, nrm[:, 0], nrm[:, 1], 1.0 / (4 * n)),
    }


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    cases = kernel_cases(args.n)
    backends = ["python"]
    try:
        kernels.use_backend("cython")
        backends.insert(0, "cython")
    except ImportError:
        print("compiled kernels not built; numpy backend only")
    times = {}
    for b in backends:
        kernels.use_backend(b)
        for name, fn in cases.items():
            times[(b, name)] = best_of(fn, args.repeat)
            print(f"{b:7s} {name:38s} {times[(b, name)]:9.4f} s")
    if len(backends) == 2:
        for name in cases:
            print(f"speed-up {name:38s} {times[('python', name)] / times[('cython', name)]:7.1f}x")
    kernels.use_backend(backends[0])

    curve = circle_curve((0.0, 0.0), 0.6, 8 * args.n).flipped()
    t = time.perf_counter()
    grid = Grid.from_domain(Domain.disc(1.0), 1.0 / args.n)
    disc = Discretization(grid, curve)
    obj = Objective(disc, curve, HelfrichParams(0.5, -0.3, 0.1), "c1", 1.0)
    build = time.perf_counter() - t
    grad, J = obj.gradient(np.zeros(grid.n_nodes), with_model=True)
    stepper = _Stepper(disc)
    t = time.perf_counter()
    stepper.direction(J, grad[disc.free], 1e-10)
    solve = time.perf_counter() - t
    print(f"grid + operators build      {build:9.4f} s")
    print(f"one Gauss-Newton solve      {solve:9.4f} s  ({int(disc.free.sum())} unknowns)")


if __name__ == "__main__":
    main()
