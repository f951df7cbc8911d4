"""Sparse SPD solves backing all implicit steps.

Matrices are scipy CSR arrays (canonical form, sorted column indices); the
CSR matvec accumulates each row left to right, which fixes the summation
order.  Inner products go through :func:`vdot` (numpy pairwise reduction,
no BLAS), so results are bitwise reproducible regardless of BLAS threading.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class SolverError(RuntimeError):
    """Linear solver failure; carries the best iterate seen so far."""

    def __init__(self, message: str, iterate: np.ndarray | None = None,
                 residual: float | None = None):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual


def make_csr(a) -> sp.csr_array:
    """Canonical CSR form with sorted indices and merged duplicates."""
    m = sp.csr_array(a)
    m.sum_duplicates()
    m.sort_indices()
    return m


def check_symmetric(a: sp.csr_array, tol: float = 1e-13) -> bool:
    d = a - a.T
    if d.nnz == 0:
        return True
    scale = max(1.0, float(np.abs(a.data).max()))
    return float(np.abs(d.data).max()) <= tol * scale


def vdot(x: np.ndarray, y: np.ndarray) -> float:
    # np.add.reduce is pairwise and single-threaded: deterministic.
    return float(np.add.reduce(x * y))


def spmv(a: sp.csr_array, x: np.ndarray) -> np.ndarray:
    if a.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {x.shape}")
    return a @ x


def cg_solve(a: sp.csr_array, b: np.ndarray, tol: float = 1e-12,
             max_iter: int | None = None, x0: np.ndarray | None = None,
             precond_diag: np.ndarray | None = None) -> np.ndarray:
    """Jacobi-preconditioned conjugate gradients for SPD ``a``.

    Stops once ``||a x - b||_2 <= tol * ||b||_2``; raises
    :class:`SolverError` with the best iterate if the iteration cap is hit.
    """
    n = b.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"dimension mismatch: {a.shape} vs rhs {n}")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if max_iter is None:
        max_iter = 10 * n + 200

    norm_b = np.sqrt(vdot(b, b))
    if norm_b == 0.0:
        return np.zeros_like(b)
    target = tol * norm_b

    if precond_diag is None:
        precond_diag = a.diagonal()
    inv_d = np.where(precond_diag > 0.0, 1.0 / np.where(precond_diag > 0.0, precond_diag, 1.0), 1.0)

    x = np.zeros_like(b) if x0 is None else x0.astype(float, copy=True)
    r = b - a @ x
    z = inv_d * r
    p = z.copy()
    rz = vdot(r, z)

    best_x = x.copy()
    best_res = np.sqrt(vdot(r, r))
    if best_res <= target:
        return x

    for _ in range(max_iter):
        ap = a @ p
        pap = vdot(p, ap)
        if pap <= 0.0:
            raise SolverError(
                f"matrix not SPD along search direction (pAp={pap!r})",
                iterate=best_x, residual=best_res)
        alpha = rz / pap
        x = x + alpha * p
        r = r - alpha * ap
        res = np.sqrt(vdot(r, r))
        if res <= target:
            # the recursively updated residual drifts below the true one
            # near machine precision; accept only a verified residual
            r = b - a @ x
            res = np.sqrt(vdot(r, r))
            if res <= target:
                if res < best_res:
                    best_x = x
                return x
            z = inv_d * r
            p = z.copy()
            rz = vdot(r, z)
        else:
            z = inv_d * r
            rz_new = vdot(r, z)
            beta = rz_new / rz
            rz = rz_new
            p = z + beta * p
        if res < best_res:
            best_res = res
            best_x = x

    # report verified residuals (the recursive ones drift near machine precision)
    res_last = np.sqrt(vdot(b - a @ x, b - a @ x))
    res_best = np.sqrt(vdot(b - a @ best_x, b - a @ best_x))
    if res_last < res_best:
        best_x, res_best = x, res_last
    raise SolverError(
        f"CG did not reach tol={tol} within {max_iter} iterations "
        f"(residual {res_best:.3e}, target {target:.3e})",
        iterate=best_x, residual=res_best)
