"""Dense linear algebra kernel for the adjustment solvers.

The bordered normal systems built by the solvers mix very different column
scales (quaternion columns of order 1e7 next to dual columns of order 1)
and contain zero diagonal blocks, so the solver here combines exact
power-of-two equilibration, LU with full pivoting, and one step of
iterative refinement.  Matrices are plain row-major numpy arrays.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, Singular

PIVOT_RTOL = 1e-14


def _equilibrate(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Scale rows then columns by powers of two (exact in binary floating point)."""
    rmax = np.max(np.abs(m), axis=1)
    rmax[rmax == 0.0] = 1.0
    rs = np.exp2(-np.round(np.log2(rmax)))
    scaled = m * rs[:, None]
    cmax = np.max(np.abs(scaled), axis=0)
    cmax[cmax == 0.0] = 1.0
    cs = np.exp2(-np.round(np.log2(cmax)))
    return scaled * cs[None, :], rs, cs


def _lu_full_pivot(a: np.ndarray):
    """In-place LU factorization with full (complete) pivoting.

    Returns the packed LU factors plus row/column permutations.  Full
    pivoting keeps the factorization stable on indefinite systems whose
    leading diagonal blocks are zero.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    piv_rows = np.arange(n)
    piv_cols = np.arange(n)
    scale = np.max(np.abs(a)) if n else 0.0
    if scale == 0.0:
        raise Singular("zero matrix")
    for k in range(n):
        sub = np.abs(a[k:, k:])
        ij = int(np.argmax(sub))
        i, j = divmod(ij, n - k)
        if sub[i, j] <= PIVOT_RTOL * scale:
            raise Singular(f"pivot {sub[i, j]:.3e} below {PIVOT_RTOL:.0e} of matrix scale")
        i += k
        j += k
        if i != k:
            a[[k, i], :] = a[[i, k], :]
            piv_rows[[k, i]] = piv_rows[[i, k]]
        if j != k:
            a[:, [k, j]] = a[:, [j, k]]
            piv_cols[[k, j]] = piv_cols[[j, k]]
        a[k + 1:, k] /= a[k, k]
        if k + 1 < n:
            a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return a, piv_rows, piv_cols


def _lu_solve(lu, piv_rows, piv_cols, b: np.ndarray) -> np.ndarray:
    """Back-substitution for one or many right-hand sides."""
    single = b.ndim == 1
    y = b[piv_rows].reshape(len(piv_rows), -1).copy()
    n = lu.shape[0]
    for k in range(1, n):
        y[k] -= lu[k, :k] @ y[:k]
    for k in range(n - 1, -1, -1):
        y[k] = (y[k] - lu[k, k + 1:] @ y[k + 1:]) / lu[k, k]
    x = np.empty_like(y)
    x[piv_cols] = y
    return x[:, 0] if single else x


def solve_square(m, w):
    """Solve the square system m @ x = w.

    Accepts a vector or a matrix of right-hand sides.  One pass of
    iterative refinement is applied, which keeps the residual near
    rounding level even for badly conditioned bordered systems.
    """
    m = np.asarray(m, dtype=float)
    w = np.asarray(w, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"matrix shape {m.shape} is not square")
    if w.shape[0] != m.shape[0]:
        raise DimensionMismatch(f"rhs length {w.shape[0]} != matrix order {m.shape[0]}")
    if m.shape[0] == 0:
        return w.copy()
    meq, rs, cs = _equilibrate(m)
    lu, pr, pc = _lu_full_pivot(meq)
    if w.ndim == 1:
        x = cs * _lu_solve(lu, pr, pc, w * rs)
        x = x + cs * _lu_solve(lu, pr, pc, (w - m @ x) * rs)
    else:
        x = cs[:, None] * _lu_solve(lu, pr, pc, w * rs[:, None])
        x = x + cs[:, None] * _lu_solve(lu, pr, pc, (w - m @ x) * rs[:, None])
    return x


def invert(m) -> np.ndarray:
    """Matrix inverse via the full-pivot factorization."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"matrix shape {m.shape} is not square")
    return solve_square(m, np.eye(m.shape[0]))


def condition_estimate(m) -> float:
    """1-norm condition number ||m||_1 * ||m^-1||_1; inf when singular.

    The systems here are small (a few hundred rows), so the inverse is
    formed explicitly rather than estimated.
    """
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 1.0
    norm1 = np.max(np.sum(np.abs(m), axis=0))
    try:
        inv = invert(m)
    except Singular:
        return float("inf")
    return float(max(1.0, norm1 * np.max(np.sum(np.abs(inv), axis=0))))
