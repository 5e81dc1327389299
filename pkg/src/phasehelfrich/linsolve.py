"""Sparse SPD solves for the Gauss-Newton steps.

CHOLMOD (through cvxopt) is used when available.  Otherwise SuperLU factors
the matrix in a geometric nested-dissection order without pivoting, since its
built-in orderings fill badly on fourth-order grid operators.  Later steps
reuse an old factorisation as a preconditioner for conjugate gradients.  All
reductions are numpy pairwise sums and factorisations run with one BLAS
thread, so results do not depend on the worker count.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl
from threadpoolctl import threadpool_limits

try:
    from cvxopt import cholmod as _cholmod
    from cvxopt import matrix as _cvx_matrix
    from cvxopt import spmatrix as _cvx_spmatrix
except ImportError:  # pragma: no cover - exercised only without cvxopt
    _cholmod = None

HAVE_CHOLMOD = _cholmod is not None


def nested_dissection(i: np.ndarray, j: np.ndarray, leaf: int = 64, separator: int = 2) -> np.ndarray:
    """Elimination order for nodes at integer coordinates (i, j).

    Recursively split along the longer extent; a strip of ``separator``
    columns (or rows) goes last.
    """
    out: list[np.ndarray] = []
    stack = [(np.arange(len(i)), False)]
    # iterative post-order: (idx, expanded)
    while stack:
        idx, expanded = stack.pop()
        if expanded or len(idx) <= leaf:
            out.append(idx)
            continue
        xi, yj = i[idx], j[idx]
        c = xi if np.ptp(xi) >= np.ptp(yj) else yj
        mid = int(np.median(c))
        left = idx[c < mid]
        sep = idx[(c >= mid) & (c < mid + separator)]
        right = idx[c >= mid + separator]
        if len(left) == 0 or len(right) == 0:
            out.append(idx)
            continue
        # pushed in reverse: left, right, separator
        stack.append((sep, True))
        stack.append((right, False))
        stack.append((left, False))
    return np.concatenate(out)


class Factor:
    """Factors of a symmetric positive definite matrix.

    ``perm`` is the fill-reducing order for the SuperLU path; CHOLMOD picks
    its own.  ``backend`` is "cholmod", "superlu" or None (best available).
    """

    def __init__(self, A: sp.spmatrix, perm: np.ndarray, backend: str | None = None):
        self.n = A.shape[0]
        self.backend = backend or ("cholmod" if HAVE_CHOLMOD else "superlu")
        with threadpool_limits(1):
            if self.backend == "cholmod":
                if not HAVE_CHOLMOD:
                    raise RuntimeError("cvxopt is not installed")
                C = sp.tril(A).tocoo()
                M = _cvx_spmatrix(C.data, C.row.astype(int).tolist(), C.col.astype(int).tolist(), size=A.shape)
                _cholmod.options["supernodal"] = 2
                self._F = _cholmod.symbolic(M, uplo="L")
                _cholmod.numeric(M, self._F)
            else:
                self.perm = perm
                Ap = A.tocsr()[perm][:, perm].tocsc()
                self._lu = spl.splu(Ap, permc_spec="NATURAL", diag_pivot_thresh=0.0, options=dict(SymmetricMode=True))

    def solve(self, b: np.ndarray) -> np.ndarray:
        with threadpool_limits(1):
            if self.backend == "cholmod":
                x = _cvx_matrix(np.ascontiguousarray(b, dtype=float))
                _cholmod.solve(self._F, x)
                return np.array(x).ravel()
            x = np.empty_like(b)
            x[self.perm] = self._lu.solve(b[self.perm])
            return x


def _dot(a, b) -> float:
    return float(np.sum(a * b))


def pcg(A, b: np.ndarray, precond, rtol: float = 1e-10, maxiter: int = 40):
    """Preconditioned CG with deterministic reductions; returns (x, iterations, converged)."""
    x = np.zeros_like(b)
    r = b.copy()
    bnorm = np.sqrt(_dot(b, b))
    if bnorm == 0.0:
        return x, 0, True
    z = precond(r)
    p = z.copy()
    rz = _dot(r, z)
    for it in range(1, maxiter + 1):
        Ap = A @ p
        alpha = rz / _dot(p, Ap)
        x += alpha * p
        r -= alpha * Ap
        if np.sqrt(_dot(r, r)) <= rtol * bnorm:
            return x, it, True
        z = precond(r)
        rz_new = _dot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, maxiter, False
