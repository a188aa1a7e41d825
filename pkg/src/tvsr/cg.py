"""Conjugate gradient for symmetric positive (semi)definite systems."""
import math

import numpy as np

from .errors import DimensionError, NumericalError

__all__ = ["cg_solve", "as_matvec"]


def as_matvec(A):
    """Turn a LinearOperator, dense matrix or callable into ``v -> A v``."""
    if hasattr(A, "apply"):
        if A.in_len != A.out_len:
            raise DimensionError("CG needs a square operator")
        return A.apply, A.in_len
    if isinstance(A, np.ndarray):
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionError("CG needs a square matrix")
        return A.dot, A.shape[0]
    if callable(A):
        return A, None
    raise TypeError(f"cannot use {type(A).__name__} as a linear operator")


def _check_symmetric(matvec, n, rng, tol=1e-8):
    u, v = rng.standard_normal(n), rng.standard_normal(n)
    lhs, rhs = u @ matvec(v), v @ matvec(u)
    if abs(lhs - rhs) > tol * max(1.0, abs(lhs), abs(rhs)):
        raise NumericalError(f"operator is not symmetric: {lhs!r} vs {rhs!r}")


def cg_solve(A, y, x0=None, eps=1e-1, max_iters=50, callback=None, check_symmetry=False):
    """Solve ``A x = y`` by conjugate gradients starting from ``x0``.

    Iterates until ``||y - A x|| <= eps * ||y||`` or ``max_iters`` steps.
    ``callback(x, p)`` is called after every step with the current iterate
    and the search direction just used.

    Returns
    -------
    x : ndarray
    iters : int
        Number of CG steps taken (0 when ``x0`` already satisfies the test).
    residual : float
        ``||y - A x||`` for the returned ``x``.
    """
    matvec, n = as_matvec(A)
    y = np.asarray(y, dtype=np.float64)
    if n is not None and y.shape != (n,):
        raise DimensionError(f"right-hand side has shape {y.shape}, expected ({n},)")
    x = np.zeros_like(y) if x0 is None else np.array(x0, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionError("x0 and y differ in shape")
    if check_symmetry:
        _check_symmetric(matvec, y.size, np.random.default_rng(0))

    target = eps * math.sqrt(float(y @ y))
    r = y - matvec(x)
    rho = float(r @ r)
    p = None
    it = 0
    while math.sqrt(rho) > target and it < max_iters:
        p = r.copy() if p is None else r + (rho / rho_prev) * p
        w = matvec(p)
        curv = float(p @ w)
        if not math.isfinite(curv):
            raise NumericalError("non-finite value in CG")
        if curv <= 0.0:
            # Direction in the null space of a semidefinite A: no further progress.
            break
        alpha = rho / curv
        x += alpha * p
        r -= alpha * w
        rho_prev, rho = rho, float(r @ r)
        it += 1
        if not math.isfinite(rho):
            raise NumericalError("non-finite value in CG")
        if callback is not None:
            callback(x, p)
    residual = float(np.linalg.norm(y - matvec(x)))
    if not math.isfinite(residual):
        raise NumericalError("non-finite residual in CG")
    return x, it, residual
