"""Shared iteration engine for the unconstrained (reduced) solvers.

Both the simplified dual-quaternion model and the single-quaternion model
eliminate the dependent quaternion components analytically, leaving seven
independent unknowns and no constraint equations.  The iteration then uses
the reduced normal equations

    dx = -(B^T N^-1 B)^-1 B^T N^-1 w,    N = A P^-1 A^T,

with the same corrected-coordinate / modified-misclosure scheme as the
constrained solver.  Only the functional model (misclosure and design
matrix B) differs between the two methods.
"""

from __future__ import annotations

import numpy as np

from . import linalg, quat
from .constrained import _check_solvable, _misclosures
from .errors import (
    MaxIterationsExceeded,
    RotationTooLarge,
    Singular,
    SingularNormalMatrix,
)
from .problem import Problem, build_weight_matrix, weight_diagonal
from .result import SolveResult

ROTATION_BRANCH_TOL = 1e-12


def dependent_quats(r123, s123) -> tuple[float, float]:
    """Dependent components (r4, s4) restoring unity and orthogonality.

    r4 = sqrt(1 - |r123|^2);  s4 = -(r123 . s123) / r4.

    Only the positive branch of the root is taken, so rotations of 180
    degrees or more raise RotationTooLarge.
    """
    r123 = np.asarray(r123, dtype=float)
    s123 = np.asarray(s123, dtype=float)
    rho = float(r123 @ r123)
    if rho > 1.0 - ROTATION_BRANCH_TOL:
        raise RotationTooLarge(f"|r123|^2 = {rho!r} leaves no room for a real r4")
    r4 = float(np.sqrt(1.0 - rho))
    s4 = float(-(r123 @ s123) / r4)
    return r4, s4


def _dependent_grads(r123, s123):
    """Gradients of r4 and s4 with respect to the independent components."""
    r123 = np.asarray(r123, dtype=float)
    s123 = np.asarray(s123, dtype=float)
    r4 = np.sqrt(1.0 - r123 @ r123)
    u = float(r123 @ s123)
    dr4_dr = -r123 / r4
    ds4_dr = -s123 / r4 - u * r123 / r4 ** 3
    ds4_ds = -r123 / r4
    return dr4_dr, ds4_dr, ds4_ds


def _assemble(problem: Problem, single: bool, lam: float, r123, s123, t, v):
    """Linearize one of the reduced models at the current iterate.

    Returns (a, b, w) with the modified misclosure already applied.
    """
    n = problem.n
    r4, s4 = dependent_quats(r123, s123)
    r = np.array([*r123, r4])
    s = np.array([*s123, s4])
    xs = problem.source + v[: 3 * n].reshape(n, 3)
    dst = problem.target + v[3 * n:].reshape(n, 3)

    wm = quat.w_matrix(r)
    qm = quat.q_matrix(r)
    wq = quat.wq_product(r)
    x4 = np.column_stack([xs, np.zeros(n)])
    dr4_dr, ds4_dr, ds4_ds = _dependent_grads(r123, s123)

    a = np.zeros((3 * n, 6 * n))
    a[:, 3 * n:] = np.eye(3 * n)
    if problem.mode == "symmetric":
        a_blk = -lam * wq[:3, :3]
        for i in range(n):
            a[3 * i: 3 * i + 3, 3 * i: 3 * i + 3] = a_blk

    # partials with respect to the full quaternions, chained below
    dfr = np.zeros((3 * n, 4))
    dfs4 = -2.0 * wm.T[:3, :]              # df/ds_k for one point, constant over points
    for j in range(4):
        dwq = quat.W_BASIS[j].T @ qm + wm.T @ quat.Q_BASIS[j]
        col = -lam * (x4 @ dwq.T)[:, :3]
        if not single:
            col = col - 2.0 * (quat.W_BASIS[j].T @ s)[:3][None, :]
        dfr[:, j] = col.ravel()

    b = np.zeros((3 * n, 7))
    if single:
        b[:, 0:3] = np.tile(-np.eye(3), (n, 1))
        b[:, 3:6] = dfr[:, :3] + np.outer(dfr[:, 3], dr4_dr)
    else:
        df_ds4 = np.tile(dfs4[:, 3], n)
        b[:, 0:3] = dfr[:, :3] + np.outer(dfr[:, 3], dr4_dr) + np.outer(df_ds4, ds4_dr)
        b[:, 3:6] = np.tile(dfs4[:, :3], (n, 1)) + np.outer(df_ds4, ds4_ds)
    b[:, 6] = -(x4 @ wq.T)[:, :3].ravel()

    if single:
        dev = quat.scaled_rotation_deviation(lam, r)
        f = ((dst - xs) - t[None, :] - xs @ dev.T).ravel()
    else:
        f = _misclosures(lam, r, s, xs, dst)
    return a, b, f - a @ v


def iterate_reduced(problem: Problem, model: str, tol: float, max_iter: int) -> SolveResult:
    """Run the reduced-normal-equation iteration for one of the two models.

    model: "dual" for unknowns (r123, s123, lambda), "single" for
    unknowns (t, r123, lambda) with the translation explicit.
    """
    _check_solvable(problem)
    n = problem.n
    single = model == "single"

    p_diag = weight_diagonal(problem)
    if p_diag is None:
        p_full = build_weight_matrix(problem)
        p_full_inv = linalg.invert(p_full)
    else:
        p_full = p_full_inv = None

    def normal_of(a):
        if p_diag is not None:
            return (a / p_diag[None, :]) @ a.T
        return a @ p_full_inv @ a.T

    lam = 1.0
    r123 = np.zeros(3)
    s123 = np.zeros(3)
    t = np.zeros(3)
    v = np.zeros(6 * n)

    condition_log: list[float] = []
    objective_log: list[float] = []
    delta_log: list[float] = []
    converged = False
    iterations = 0
    k = np.zeros(3 * n)

    for iterations in range(1, max_iter + 1):
        a, b, w = _assemble(problem, single, lam, r123, s123, t, v)
        n_mat = normal_of(a)
        try:
            nb = linalg.solve_square(n_mat, b)
            nw = linalg.solve_square(n_mat, w)
            btnb = b.T @ nb
            condition_log.append(linalg.condition_estimate(btnb))
            dx = -linalg.solve_square(btnb, b.T @ nw)
            k = -linalg.solve_square(n_mat, b @ dx + w)
        except Singular as exc:
            # approaching r4 = 0 the substituted derivatives are dominated by
            # a rank-one blow-up and the reduced system degenerates; report
            # the branch limit rather than a bare singularity
            if r123 @ r123 > 0.999:
                raise RotationTooLarge(
                    "rotation at the 180 degree limit of the positive-r4 branch") from exc
            raise SingularNormalMatrix(str(exc)) from exc
        if p_diag is not None:
            v = (a.T @ k) / p_diag
        else:
            v = p_full_inv @ (a.T @ k)
        objective_log.append(float(v @ (p_diag * v)) if p_diag is not None
                             else float(v @ (p_full @ v)))
        # a full Gauss-Newton step may overshoot the open unit ball of the
        # rotation parameterization; damp it until the iterate stays inside
        dr = dx[3:6] if single else dx[0:3]
        alpha = 1.0
        while alpha > 1e-6:
            cand = r123 + alpha * dr
            if cand @ cand < 1.0 - ROTATION_BRANCH_TOL:
                break
            alpha *= 0.5
        else:
            raise RotationTooLarge(
                "iterate pinned at the 180 degree boundary of the positive-r4 branch")
        dx = alpha * dx
        if single:
            t = t + dx[0:3]
            r123 = r123 + dx[3:6]
        else:
            r123 = r123 + dx[0:3]
            s123 = s123 + dx[3:6]
        lam += dx[6]
        crit = float(dx[:6] @ dx[:6])
        delta_log.append(crit)
        # a tolerance below the representable update size would never fire
        lam_tol = max(tol, 4.0 * np.finfo(float).eps * max(1.0, abs(lam)))
        if crit < tol and abs(dx[6]) < lam_tol:
            converged = True
            break
    if not converged:
        raise MaxIterationsExceeded(f"no convergence within {max_iter} iterations "
                                    f"(last step size {delta_log[-1]:.3e})")

    # parameter cofactor rebuilt at the converged values
    a, b, _ = _assemble(problem, single, lam, r123, s123, t, v)
    try:
        qx = linalg.invert(b.T @ linalg.solve_square(normal_of(a), b))
    except Singular as exc:
        raise SingularNormalMatrix(str(exc)) from exc

    r4, s4 = dependent_quats(r123, s123)
    r = np.array([*r123, r4])
    if single:
        # dual part implied by the estimated translation: s = W(r) [t, 0] / 2
        s = 0.5 * (quat.w_matrix(r) @ np.array([*t, 0.0]))
        param_names = ("tx", "ty", "tz", "r1", "r2", "r3", "lambda")
    else:
        s = np.array([*s123, s4])
        param_names = ("r1", "r2", "r3", "s1", "s2", "s3", "lambda")

    dof = problem.dof
    return SolveResult(
        method="qa" if single else "dqa-simplified",
        quat_form="unit",
        mode=problem.mode,
        dim=problem.dim,
        n_points=n,
        point_ids=tuple(p.id for p in problem.points),
        lambda_=float(lam),
        r=r / np.linalg.norm(r),
        s=s,
        residuals=v,
        sigma0=float(np.sqrt(objective_log[-1] / dof)),
        dof=dof,
        dof_2d=problem.dof_2d if problem.dim == 2 else None,
        iterations=iterations,
        converged=converged,
        k_a=k,
        k_b=None,
        qx=qx,
        param_names=param_names,
        condition_log=condition_log,
        objective_log=objective_log,
        delta_log=delta_log,
    )
