"""Unconstrained (simplified) dual-quaternion solver.

The unity and orthogonality constraints are eliminated analytically:
r4 and s4 are substituted as functions of the six independent quaternion
components, so the adjustment solves for (r1, r2, r3, s1, s2, s3, lambda)
with a single Lagrange vector and no constraint equations.  The full
(r, s) reconstructed at any iterate satisfies both constraints to
rounding by construction.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from ._reduced import _dependent_grads, dependent_quats, iterate_reduced
from .constrained import MAX_ITER_DEFAULT, STOP_TOL_DEFAULT
from .precision import (
    CovarianceReport,
    angle_jacobian,
    translation_jacobian,
)
from .problem import Problem
from .result import SolveResult

__all__ = ["dependent_quats", "solve_simplified", "covariance_simplified"]


def solve_simplified(problem: Problem, *, tol: float = STOP_TOL_DEFAULT,
                     max_iter: int = MAX_ITER_DEFAULT) -> SolveResult:
    """Estimate the transformation without constraint equations.

    Produces the same geometric parameters as the constrained solver;
    rotations with a non-positive scalar component are outside this
    parameterization and raise RotationTooLarge.
    """
    return iterate_reduced(problem, "dual", tol, max_iter)


def _full_from_reduced_jacobian(r123, s123) -> np.ndarray:
    """9x7 chain matrix mapping (r123, s123, lambda) to (lambda, r, s)."""
    dr4_dr, ds4_dr, ds4_ds = _dependent_grads(r123, s123)
    t = np.zeros((9, 7))
    t[0, 6] = 1.0                 # lambda
    t[1:4, 0:3] = np.eye(3)       # r123
    t[4, 0:3] = dr4_dr            # r4
    t[5:8, 3:6] = np.eye(3)       # s123
    t[8, 0:3] = ds4_dr            # s4
    t[8, 3:6] = ds4_ds
    return t


def reduced_six_param_jacobian(r123, s123) -> np.ndarray:
    """6x6 Jacobian of (eps, psi, omega, t) wrt the independent (r123, s123).

    Chains the closed-form angle and translation Jacobians through the
    substituted r4(r123) and s4(r123, s123).
    """
    r4, s4 = dependent_quats(r123, s123)
    r = np.array([*r123, r4])
    s = np.array([*s123, s4])
    dr4_dr, ds4_dr, ds4_ds = _dependent_grads(r123, s123)
    ja = angle_jacobian(r)                 # 3x4 wrt full r
    jt = translation_jacobian(r, s)        # 3x8 wrt full (r, s)
    out = np.zeros((6, 6))
    out[:3, 0:3] = ja[:, :3] + np.outer(ja[:, 3], dr4_dr)
    out[3:, 0:3] = jt[:, :3] + np.outer(jt[:, 3], dr4_dr) + np.outer(jt[:, 7], ds4_dr)
    out[3:, 3:6] = jt[:, 4:7] + np.outer(jt[:, 7], ds4_ds)
    return out


def covariance_simplified(result: SolveResult) -> CovarianceReport:
    """Covariance report for a simplified solve.

    The 7x7 covariance of the independent unknowns is propagated to the
    dependent (r4, s4) pair and to the six geometric parameters; the
    quaternion block is reported in the same (lambda, r, s) layout as the
    constrained path.
    """
    if result.qx is None:
        raise ValueError("result does not carry the reduced parameter cofactor")
    c7 = result.sigma0 ** 2 * result.qx     # order (r123, s123, lambda)
    r123, s123 = result.r[:3], result.s[:3]
    t = _full_from_reduced_jacobian(r123, s123)
    c_qq = t @ c7 @ t.T                     # order (lambda, r, s)
    c_qq = 0.5 * (c_qq + c_qq.T)

    c6 = c7[:6, :6]                         # lambda row/column removed
    jp = reduced_six_param_jacobian(r123, s123)
    c_par = jp @ c6 @ jp.T
    c_par = 0.5 * (c_par + c_par.T)
    return CovarianceReport(
        c_full=c7,
        c_qq=c_qq,
        sigma_lambda=float(np.sqrt(c7[6, 6])),
        sigma_r=np.sqrt(np.diag(c_qq)[1:5]),
        sigma_s=np.sqrt(np.diag(c_qq)[5:9]),
        c_par=c_par,
        sigmas_six=np.sqrt(np.diag(c_par)),
    )
