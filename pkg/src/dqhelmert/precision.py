"""Covariance extraction and propagation to the six geometric parameters.

The constrained solver's bordered normal matrix inverse carries the full
precision information: scaled by the a-posteriori variance it is the
variance-covariance matrix of every unknown, Lagrange multipliers
included.  The trailing block belongs to the quaternion (and scale)
parameters; propagating it through the Jacobian of the Euler angles and
the translation components yields the 6x6 covariance of
(eps, psi, omega, t_x, t_y, t_z).

Angle variances are kept in radians^2 here; reporting layers convert to
degrees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quat
from .errors import GimbalSingularity
from .result import SolveResult

GIMBAL_TOL = 1e-12


@dataclass
class SixParams:
    """Euler angles (radians) and translation (metres)."""

    eps: float
    psi: float
    omega: float
    t: np.ndarray

    @property
    def angles_deg(self) -> np.ndarray:
        return np.degrees([self.eps, self.psi, self.omega])


@dataclass
class CovarianceReport:
    """Standard errors and covariance blocks of a converged solve.

    c_full:   full parameter covariance in the method's own unknown order.
    c_qq:     quaternion(+scale) block: 9x9 (lambda, r, s) for the unit
              constrained path, 8x8 (r, s) for the scaled path, 9x9
              propagated for the reduced path, None for the qa path.
    c_par:    6x6 covariance of (eps, psi, omega, t_x, t_y, t_z);
              angle entries in rad^2, cross terms rad*m, translations m^2.
    sigma_s:  None when the method does not estimate the dual part (qa).
    """

    c_full: np.ndarray
    c_qq: np.ndarray | None
    sigma_lambda: float
    sigma_r: np.ndarray
    sigma_s: np.ndarray | None
    c_par: np.ndarray
    sigmas_six: np.ndarray


def angle_jacobian(r) -> np.ndarray:
    """3x4 Jacobian of (eps, psi, omega) with respect to (r1..r4).

    Derivatives of the closed-form angle expressions as written for unit
    quaternions; use angle_jacobian_scaled for non-unit quaternions.
    """
    r1, r2, r3, r4 = np.asarray(r, dtype=float)
    a = 2.0 * (r4 * r1 + r2 * r3)
    b = r4 * r4 - r1 * r1 - r2 * r2 + r3 * r3
    da = 2.0 * np.array([r4, r3, r2, r1])
    db = 2.0 * np.array([-r1, -r2, r3, r4])
    g_eps = -(b * da - a * db) / (a * a + b * b)

    u = 2.0 * (r3 * r1 - r4 * r2)
    if 1.0 - u * u < GIMBAL_TOL * GIMBAL_TOL:
        raise GimbalSingularity("cos(psi) vanishes; angle Jacobian undefined")
    du = 2.0 * np.array([r3, -r4, r1, -r2])
    g_psi = du / np.sqrt(1.0 - u * u)

    a2 = 2.0 * (r4 * r3 + r2 * r1)
    b2 = r4 * r4 + r1 * r1 - r2 * r2 - r3 * r3
    da2 = 2.0 * np.array([r2, r1, r4, r3])
    db2 = 2.0 * np.array([r1, -r2, -r3, r4])
    g_ome = -(b2 * da2 - a2 * db2) / (a2 * a2 + b2 * b2)
    return np.vstack([g_eps, g_psi, g_ome])


def angle_jacobian_scaled(r) -> np.ndarray:
    """3x4 angle Jacobian valid for scaled quaternions.

    eps and omega are ratios of quadratic forms and scale-invariant as
    written; the arcsin argument of psi must be normalized by |r|^2
    before differentiating.
    """
    r = np.asarray(r, dtype=float)
    r1, r2, r3, r4 = r
    nu = float(r @ r)
    jac = np.empty((3, 4))

    # eps and omega rows: ratios of quadratic forms, degree-0 homogeneous,
    # so the unit-form quotient derivatives apply unchanged
    a = 2.0 * (r4 * r1 + r2 * r3)
    b = r4 * r4 - r1 * r1 - r2 * r2 + r3 * r3
    da = 2.0 * np.array([r4, r3, r2, r1])
    db = 2.0 * np.array([-r1, -r2, r3, r4])
    jac[0] = -(b * da - a * db) / (a * a + b * b)

    u = 2.0 * (r3 * r1 - r4 * r2)
    arg = u / nu
    if 1.0 - arg * arg < GIMBAL_TOL * GIMBAL_TOL:
        raise GimbalSingularity("cos(psi) vanishes; angle Jacobian undefined")
    du = 2.0 * np.array([r3, -r4, r1, -r2])
    jac[1] = (du * nu - u * 2.0 * r) / (nu * nu) / np.sqrt(1.0 - arg * arg)

    a2 = 2.0 * (r4 * r3 + r2 * r1)
    b2 = r4 * r4 + r1 * r1 - r2 * r2 - r3 * r3
    da2 = 2.0 * np.array([r2, r1, r4, r3])
    db2 = 2.0 * np.array([r1, -r2, -r3, r4])
    jac[2] = -(b2 * da2 - a2 * db2) / (a2 * a2 + b2 * b2)
    return jac


def translation_jacobian(r, s) -> np.ndarray:
    """3x8 Jacobian of t = 2 W(r)^T s with respect to (r1..r4, s1..s4); exact."""
    r1, r2, r3, r4 = np.asarray(r, dtype=float)
    s1, s2, s3, s4 = np.asarray(s, dtype=float)
    return 2.0 * np.array([
        [-s4, s3, -s2, s1, r4, -r3, r2, -r1],
        [-s3, -s4, s1, s2, r3, r4, -r1, -r2],
        [s2, -s1, -s4, s3, -r2, r1, r4, -r3],
    ])


def six_param_jacobian(r, s, scaled: bool = False) -> np.ndarray:
    """6x8 Jacobian of (eps, psi, omega, t) with respect to (r, s)."""
    j = np.zeros((6, 8))
    j[:3, :4] = angle_jacobian_scaled(r) if scaled else angle_jacobian(r)
    j[3:, :] = translation_jacobian(r, s)
    return j


def covariance_constrained(result: SolveResult) -> CovarianceReport:
    """Covariance report for a constrained (bordered-system) solve.

    The full covariance is sigma0^2 times the retained inverse of the
    bordered matrix; quaternion and scale standard errors are read from
    its trailing diagonal block.
    """
    if result.m_inverse is None:
        raise ValueError("result does not carry the bordered-matrix inverse")
    c_full = result.sigma0 ** 2 * result.m_inverse
    k = len(result.param_names)               # 9 unit / 8 scaled
    cq = c_full[-k:, -k:]
    cq = 0.5 * (cq + cq.T)                    # parameter block is symmetric in exact arithmetic

    scaled = result.quat_form == "scaled"
    if scaled:
        r_use, s_use = result.r_scaled, result.s_scaled
        c_rs = cq
        sigma_r = np.sqrt(np.diag(cq)[0:4])
        sigma_s = np.sqrt(np.diag(cq)[4:8])
        # lambda = |r_scaled|^2, so grad = 2 r_scaled over the r block
        sigma_lambda = float(np.sqrt(4.0 * r_use @ cq[:4, :4] @ r_use))
    else:
        r_use, s_use = result.r, result.s
        c_rs = cq[1:, 1:]
        sigma_lambda = float(np.sqrt(cq[0, 0]))
        sigma_r = np.sqrt(np.diag(cq)[1:5])
        sigma_s = np.sqrt(np.diag(cq)[5:9])

    j = six_param_jacobian(r_use, s_use, scaled=scaled)
    c_par = j @ c_rs @ j.T
    c_par = 0.5 * (c_par + c_par.T)
    return CovarianceReport(
        c_full=c_full,
        c_qq=cq,
        sigma_lambda=sigma_lambda,
        sigma_r=sigma_r,
        sigma_s=sigma_s,
        c_par=c_par,
        sigmas_six=np.sqrt(np.diag(c_par)),
    )


def six_param_covariance(result: SolveResult, report: CovarianceReport) -> tuple[SixParams, np.ndarray]:
    """Six geometric parameters and their covariance from a solve and its report."""
    eps, psi, omega = result.euler
    return SixParams(eps=eps, psi=psi, omega=omega, t=result.translation), report.c_par
