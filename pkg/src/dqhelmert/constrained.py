"""Constrained errors-in-variables solver for the symmetric similarity transformation.

Estimates the scale factor and the dual quaternion (r, s) from control
points observed with noise in both frames.  The implicit per-point model

    f_i = X_i + v_XYZ,i - 2 W(r)^T s - lambda W(r)^T Q(r) (x_i + v_xyz,i)

is linearized in the residuals and the unknowns; the unity and
orthogonality constraints on (r, s) enter through Lagrange multipliers,
giving a bordered normal system solved as a whole each iteration.

Two variants share the machinery: the unit form with unknowns
(lambda, r, s) and both constraints, and the scaled form where the scale
is absorbed into the quaternion norm, leaving eight unknowns and the
orthogonality constraint only.

Convergence of ill-conditioned networks relies on two details of the
iteration: coordinates are corrected with the previous residuals, and the
misclosure is reduced by the residual contribution (the modified
misclosure), which keeps the iteration anchored to the original
observations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg, quat
from .errors import (
    DegenerateGeometry,
    InsufficientPoints,
    MaxIterationsExceeded,
    Singular,
    SingularNormalMatrix,
)
from .problem import Problem, build_weight_matrix, validate_problem, weight_diagonal
from .result import SolveResult

STOP_TOL_DEFAULT = 1e-11
MAX_ITER_DEFAULT = 100
CONSTRAINT_TOL = 1e-10

PARAM_NAMES_UNIT = ("lambda", "r1", "r2", "r3", "r4", "s1", "s2", "s3", "s4")
PARAM_NAMES_SCALED = ("r1", "r2", "r3", "r4", "s1", "s2", "s3", "s4")


@dataclass
class LinearizedSystem:
    """One iteration's linearization.

    a:  3n x 6n residual coefficients; right half is the identity, left half
        holds the per-point blocks -lambda (W^T Q)_3x3 (zero in asymmetric mode).
    b:  3n x k design matrix, k = 9 unit / 8 scaled.
    c:  constraint rows (2 x 9 unit / 1 x 8 scaled).
    w1: modified misclosure f - a @ v_prev.
    w2: constraint misclosure.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    w1: np.ndarray
    w2: np.ndarray


def eval_model(lam: float, r, s, source, target) -> np.ndarray:
    """Misclosure of one point at the given parameter values.

    ``source`` and ``target`` are the (corrected) coordinates of the point
    in the two frames.  Evaluated as
    (target - source) - 2 (W^T s) - (lambda W^T Q - I) source,
    which is algebraically the implicit model but avoids losing the small
    misclosure to rounding when coordinates are large.
    """
    source = np.asarray(source, dtype=float)
    target = np.asarray(target, dtype=float)
    ts = quat.translation_from_dualquat(r, s)
    dev = quat.scaled_rotation_deviation(lam, r)
    return (target - source) - ts - dev @ source


def _misclosures(lam: float, r, s, xs: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """eval_model stacked over all points; xs, dst are (n, 3) corrected coords."""
    ts = quat.translation_from_dualquat(r, s)
    dev = quat.scaled_rotation_deviation(lam, r)
    return ((dst - xs) - ts[None, :] - xs @ dev.T).ravel()


def linearize(problem: Problem, lam: float, r, s, v_prev, quat_form: str = "unit") -> LinearizedSystem:
    """Build the linearized observation and constraint equations.

    Coordinates are corrected with ``v_prev`` before evaluation, and the
    misclosure is reduced by ``a @ v_prev`` so the solved residuals stay
    referred to the original observations.
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    v_prev = np.asarray(v_prev, dtype=float)
    n = problem.n
    src = problem.source + v_prev[: 3 * n].reshape(n, 3)
    dst = problem.target + v_prev[3 * n:].reshape(n, 3)

    scaled = quat_form == "scaled"
    lam_eff = 1.0 if scaled else lam
    k = 8 if scaled else 9

    wm = quat.w_matrix(r)
    qm = quat.q_matrix(r)
    wq = quat.wq_product(r)
    x4 = np.column_stack([src, np.zeros(n)])          # n x 4, padded source coords

    a = np.zeros((3 * n, 6 * n))
    a[:, 3 * n:] = np.eye(3 * n)
    if problem.mode == "symmetric":
        a_blk = -lam_eff * wq[:3, :3]
        for i in range(n):
            a[3 * i: 3 * i + 3, 3 * i: 3 * i + 3] = a_blk

    b = np.zeros((3 * n, k))
    col = 0
    if not scaled:
        b[:, 0] = -(x4 @ wq.T)[:, :3].ravel()
        col = 1
    for j in range(4):
        dwq = quat.W_BASIS[j].T @ qm + wm.T @ quat.Q_BASIS[j]
        const = -2.0 * (quat.W_BASIS[j].T @ s)[:3]
        b[:, col + j] = (const[None, :] - lam_eff * (x4 @ dwq.T)[:, :3]).ravel()
    b[:, col + 4: col + 8] = np.tile(-2.0 * wm.T[:3, :], (n, 1))

    if scaled:
        c = np.concatenate([s, r])[None, :]
        w2 = np.array([r @ s])
    else:
        c = np.zeros((2, 9))
        c[0, 1:5] = r
        c[1, 1:5] = s
        c[1, 5:9] = r
        w2 = np.array([0.5 * (r @ r - 1.0), r @ s])

    f = _misclosures(lam_eff, r, s, src, dst)
    w1 = f - a @ v_prev
    return LinearizedSystem(a=a, b=b, c=c, w1=w1, w2=w2)


def _normal_matrix(a: np.ndarray, p_diag, p_full_inv) -> np.ndarray:
    """N = A P^-1 A^T."""
    if p_diag is not None:
        return (a / p_diag[None, :]) @ a.T
    return a @ p_full_inv @ a.T


def _bordered_matrix(n_mat, b, c):
    """Assemble [[N, 0, B], [0, 0, C], [-B^T, -C^T, 0]] and its size bookkeeping."""
    rows_n = n_mat.shape[0]
    nc, k = c.shape
    m = np.zeros((rows_n + nc + k, rows_n + nc + k))
    m[:rows_n, :rows_n] = n_mat
    m[:rows_n, rows_n + nc:] = b
    m[rows_n: rows_n + nc, rows_n + nc:] = c
    m[rows_n + nc:, :rows_n] = -b.T
    m[rows_n + nc:, rows_n: rows_n + nc] = -c.T
    return m


def _check_solvable(problem: Problem) -> None:
    diags = validate_problem(problem)
    errors = [d for d in diags if d.severity == "error"]
    if any("insufficient" in d.message for d in errors):
        raise InsufficientPoints(errors[0].message)
    if errors:
        raise DegenerateGeometry("; ".join(d.message for d in errors))
    if any(d.severity == "warning" and "collinear" in d.message for d in diags):
        raise DegenerateGeometry("control points are (near-)collinear")


def _solve_bordered(problem: Problem, quat_form: str, tol: float, max_iter: int) -> SolveResult:
    _check_solvable(problem)
    n = problem.n
    scaled = quat_form == "scaled"

    p_diag = weight_diagonal(problem)
    if p_diag is None:
        p_full = build_weight_matrix(problem)
        p_full_inv = linalg.invert(p_full)
    else:
        p_full = p_full_inv = None

    lam = 1.0
    r = quat.IDENTITY.copy()
    s = np.zeros(4)
    v = np.zeros(6 * n)

    condition_log: list[float] = []
    objective_log: list[float] = []
    delta_log: list[float] = []
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        sys_ = linearize(problem, lam, r, s, v, quat_form)
        n_mat = _normal_matrix(sys_.a, p_diag, p_full_inv)
        m = _bordered_matrix(n_mat, sys_.b, sys_.c)
        condition_log.append(linalg.condition_estimate(m))
        rhs = np.concatenate([-sys_.w1, -sys_.w2, np.zeros(sys_.b.shape[1])])
        try:
            x = linalg.solve_square(m, rhs)
        except Singular as exc:
            raise SingularNormalMatrix(str(exc)) from exc
        k_a = x[: 3 * n]
        nc = sys_.c.shape[0]
        k_b = x[3 * n: 3 * n + nc]
        dx = x[3 * n + nc:]
        if scaled:
            dlam, dr, ds = 0.0, dx[:4], dx[4:]
        else:
            dlam, dr, ds = dx[0], dx[1:5], dx[5:9]
        lam += dlam
        r = r + dr
        s = s + ds
        if p_diag is not None:
            v = (sys_.a.T @ k_a) / p_diag
        else:
            v = p_full_inv @ (sys_.a.T @ k_a)
        objective_log.append(float(v @ (p_diag * v)) if p_diag is not None
                             else float(v @ (p_full @ v)))
        crit = float(dr @ dr + ds @ ds)
        delta_log.append(crit)
        # a tolerance below the representable update size would never fire
        lam_tol = max(tol, 4.0 * np.finfo(float).eps * max(1.0, abs(lam)))
        if crit < tol and abs(dlam) < lam_tol:
            lam_chk = float(r @ r) if scaled else lam
            r_chk, s_chk = (r / np.sqrt(lam_chk), s * np.sqrt(lam_chk)) if scaled else (r, s)
            if abs(r_chk @ r_chk - 1.0) < CONSTRAINT_TOL and abs(r_chk @ s_chk) < CONSTRAINT_TOL:
                converged = True
                break
    if not converged:
        raise MaxIterationsExceeded(f"no convergence within {max_iter} iterations "
                                    f"(last step size {delta_log[-1]:.3e})")

    # rebuild the system at the converged values so the retained inverse
    # (and every covariance derived from it) refers to the final estimate
    sys_ = linearize(problem, lam, r, s, v, quat_form)
    n_mat = _normal_matrix(sys_.a, p_diag, p_full_inv)
    m = _bordered_matrix(n_mat, sys_.b, sys_.c)
    try:
        m_inverse = linalg.invert(m)
    except Singular as exc:
        raise SingularNormalMatrix(str(exc)) from exc

    vpv = objective_log[-1]
    dof = problem.dof
    sigma0 = float(np.sqrt(vpv / dof))

    if scaled:
        lam_out = float(r @ r)
        r_unit, s_unit = r / np.sqrt(lam_out), s * np.sqrt(lam_out)
    else:
        lam_out = float(lam)
        # the constraints drive |r| to 1; only the reported value is polished
        r_unit, s_unit = r / np.linalg.norm(r), s

    return SolveResult(
        method="dqa-constrained",
        quat_form=quat_form,
        mode=problem.mode,
        dim=problem.dim,
        n_points=n,
        point_ids=tuple(p.id for p in problem.points),
        lambda_=lam_out,
        r=r_unit,
        s=s_unit,
        residuals=v,
        sigma0=sigma0,
        dof=dof,
        dof_2d=problem.dof_2d if problem.dim == 2 else None,
        iterations=iterations,
        converged=converged,
        k_a=k_a,
        k_b=k_b,
        m_inverse=m_inverse,
        param_names=PARAM_NAMES_SCALED if scaled else PARAM_NAMES_UNIT,
        condition_log=condition_log,
        objective_log=objective_log,
        delta_log=delta_log,
    )


def solve_constrained(problem: Problem, *, tol: float = STOP_TOL_DEFAULT,
                      max_iter: int = MAX_ITER_DEFAULT) -> SolveResult:
    """Estimate (lambda, r, s) with unit quaternions and both constraints.

    Starts from the identity transform (lambda = 1, r = (0,0,0,1), s = 0)
    and iterates until the quaternion updates satisfy
    dr.dr + ds.ds < tol and |dlambda| < tol.
    """
    return _solve_bordered(problem, "unit", tol, max_iter)


def solve_scaled(problem: Problem, *, tol: float = STOP_TOL_DEFAULT,
                 max_iter: int = MAX_ITER_DEFAULT) -> SolveResult:
    """Scaled-quaternion variant: eight unknowns, orthogonality constraint only.

    The scale factor is recovered as the squared quaternion norm; the
    returned result stores the unit form, with the scaled quaternions
    available as properties.
    """
    return _solve_bordered(problem, "scaled", tol, max_iter)


def closure_check(result: SolveResult, problem: Problem) -> float:
    """Largest misclosure component over all points at the corrected coordinates.

    The corrected coordinates of the target frame must be reproduced
    exactly (to rounding) from the corrected source coordinates; values
    above 1e-8 m indicate a failed adjustment.
    """
    n = problem.n
    xs = problem.source + result.residuals_source
    ds = problem.target + result.residuals_target
    f = _misclosures(result.lambda_, result.r, result.s, xs, ds)
    return float(np.max(np.abs(f))) if n else 0.0


CLOSURE_TOL = 1e-8


def transform_point(result: SolveResult, p) -> np.ndarray:
    """Map a source-frame point into the target frame with the converged parameters."""
    p = np.asarray(p, dtype=float)
    dev = quat.scaled_rotation_deviation(result.lambda_, result.r)
    return p + dev @ p + result.translation
