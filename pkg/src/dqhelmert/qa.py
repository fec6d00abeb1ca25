"""Single-quaternion reference solver with explicit translation unknowns.

The functional model replaces the dual part by the translation vector
directly,

    f_i = X_i + v_XYZ,i - t - lambda W(r)^T Q(r) (x_i + v_xyz,i),

with r4 substituted from the unity condition.  The seven unknowns
(t, r1, r2, r3, lambda) iterate through the same reduced engine as the
simplified solver; only the design matrix differs.  Used as the
cross-check that the dual-quaternion paths add nothing and lose nothing.
"""

from __future__ import annotations

import numpy as np

from ._reduced import _dependent_grads, dependent_quats, iterate_reduced
from .constrained import MAX_ITER_DEFAULT, STOP_TOL_DEFAULT
from .precision import CovarianceReport, angle_jacobian
from .problem import Problem
from .result import SolveResult

__all__ = ["solve_qa", "covariance_qa"]


def solve_qa(problem: Problem, *, tol: float = STOP_TOL_DEFAULT,
             max_iter: int = MAX_ITER_DEFAULT) -> SolveResult:
    """Estimate (t, r, lambda) with the single-quaternion model.

    The returned result carries the implied dual part s = W(r) [t, 0] / 2,
    so transformation and comparison utilities work uniformly across
    methods.
    """
    return iterate_reduced(problem, "single", tol, max_iter)


def covariance_qa(result: SolveResult) -> CovarianceReport:
    """Covariance report for a single-quaternion solve.

    Translation errors are read directly from the unknowns' covariance;
    angle errors are propagated from the rotation block through the
    substituted r4.  No dual-part covariance is produced.
    """
    if result.qx is None:
        raise ValueError("result does not carry the reduced parameter cofactor")
    c7 = result.sigma0 ** 2 * result.qx     # order (t, r123, lambda)
    r123 = result.r[:3]
    dr4_dr, _, _ = _dependent_grads(r123, np.zeros(3))
    r4, _ = dependent_quats(r123, np.zeros(3))
    r = np.array([*r123, r4])

    c_rr = c7[3:6, 3:6]
    sigma_r4 = float(np.sqrt(dr4_dr @ c_rr @ dr4_dr))
    sigma_r = np.append(np.sqrt(np.diag(c_rr)), sigma_r4)

    ja = angle_jacobian(r)
    ja_red = ja[:, :3] + np.outer(ja[:, 3], dr4_dr)
    j6 = np.zeros((6, 6))                   # (eps, psi, omega, t) from (t, r123)
    j6[:3, 3:6] = ja_red
    j6[3:, 0:3] = np.eye(3)
    c6 = c7[:6, :6]
    c_par = j6 @ c6 @ j6.T
    c_par = 0.5 * (c_par + c_par.T)
    return CovarianceReport(
        c_full=c7,
        c_qq=None,
        sigma_lambda=float(np.sqrt(c7[6, 6])),
        sigma_r=sigma_r,
        sigma_s=None,
        c_par=c_par,
        sigmas_six=np.sqrt(np.diag(c_par)),
    )
