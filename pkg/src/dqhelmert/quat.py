"""Quaternion and dual-quaternion algebra for similarity transformations.

Conventions
-----------
Quaternions are stored as length-4 numpy arrays in *vector-first* order,

    q = (q1, q2, q3, q4),   vector part (q1, q2, q3), scalar part q4,

so the identity rotation is ``(0, 0, 0, 1)``.  A dual quaternion is the
pair ``(r, s)``: ``r`` carries the rotation and ``s`` the translation via
``t = 2 W(r)^T s``.  A *unit* dual quaternion satisfies ``r.r = 1`` and
``r.s = 0``; a *scaled* quaternion absorbs the scale factor into its norm,
``|q_s|^2 = lambda``.

All functions are pure and operate on plain arrays, so values can be
shared freely across threads.
"""

from __future__ import annotations

import numpy as np

from .errors import GimbalSingularity, NonPositiveScale, NotUnit, ZeroQuaternion

IDENTITY = np.array([0.0, 0.0, 0.0, 1.0])

UNIT_TOL = 1e-9
GIMBAL_TOL = 1e-12


def quat_norm(q) -> float:
    """Euclidean norm sqrt(q1^2 + q2^2 + q3^2 + q4^2)."""
    q = np.asarray(q, dtype=float)
    return float(np.sqrt(q @ q))


def skew(v) -> np.ndarray:
    """Skew-symmetric cross-product matrix C(v) with C(v) @ v = 0."""
    v = np.asarray(v, dtype=float)
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def w_matrix(r) -> np.ndarray:
    """4x4 left-multiplication matrix W(r), block form [[r4 I - C(r), v], [-v^T, r4]]."""
    r = np.asarray(r, dtype=float)
    v, r4 = r[:3], r[3]
    out = np.empty((4, 4))
    out[:3, :3] = r4 * np.eye(3) - skew(v)
    out[:3, 3] = v
    out[3, :3] = -v
    out[3, 3] = r4
    return out


def q_matrix(r) -> np.ndarray:
    """4x4 right-multiplication matrix Q(r); differs from W(r) by the sign of C(r)."""
    r = np.asarray(r, dtype=float)
    v, r4 = r[:3], r[3]
    out = np.empty((4, 4))
    out[:3, :3] = r4 * np.eye(3) + skew(v)
    out[:3, 3] = v
    out[3, :3] = -v
    out[3, 3] = r4
    return out


# Constant basis matrices W(e_k), Q(e_k); W and Q are linear in r, so these
# are the partial derivatives of W and Q with respect to each component.
W_BASIS = tuple(w_matrix(e) for e in np.eye(4))
Q_BASIS = tuple(q_matrix(e) for e in np.eye(4))


def wq_product(r) -> np.ndarray:
    """W(r)^T Q(r).

    For any r this is block diagonal: a 3x3 rotation-like block and the
    scalar r.r in the corner; for unit r the block is exactly the rotation
    matrix of r.
    """
    r = np.asarray(r, dtype=float)
    out = np.zeros((4, 4))
    out[:3, :3] = rotation_block(r)
    out[3, 3] = r @ r
    return out


def rotation_block(r) -> np.ndarray:
    """(r4^2 - v.v) I + 2 r4 C(v) + 2 v v^T, the 3x3 block of W(r)^T Q(r).

    Equals the rotation matrix when r is unit, and lambda times it when r
    is a scaled quaternion.
    """
    r = np.asarray(r, dtype=float)
    v, r4 = r[:3], r[3]
    return (r4 * r4 - v @ v) * np.eye(3) + 2.0 * r4 * skew(v) + 2.0 * np.outer(v, v)


def scaled_rotation_deviation(lam: float, r) -> np.ndarray:
    """lambda * rotation_block(r) - I, evaluated without large-term cancellation.

    Near the identity transform the naive difference loses the small entries
    to rounding; expanding with eta = |r|^2 - 1 keeps every term small, which
    matters when coordinates are large (millions of metres) and the misclosure
    must be accurate to sub-millimetre.
    """
    r = np.asarray(r, dtype=float)
    v, r4 = r[:3], r[3]
    rho = v @ v
    eta = (r4 - 1.0) * (r4 + 1.0) + rho
    d0 = (lam - 1.0) + lam * (eta - 2.0 * rho)
    return d0 * np.eye(3) + (2.0 * lam * r4) * skew(v) + (2.0 * lam) * np.outer(v, v)


def rotation_from_unit_quat(r) -> np.ndarray:
    """Proper orthogonal rotation matrix of a unit quaternion.

    Raises NotUnit if |r| deviates from 1 by more than 1e-9.
    """
    r = np.asarray(r, dtype=float)
    nrm = quat_norm(r)
    if abs(nrm - 1.0) > UNIT_TOL:
        raise NotUnit(f"|r| = {nrm!r} is not 1 within {UNIT_TOL}")
    return rotation_block(r)


def euler_from_unit_quat(r) -> tuple[float, float, float]:
    """Euler angles (eps, psi, omega) in radians from a unit quaternion.

    eps   = -atan2(2 (r4 r1 + r2 r3), r4^2 - r1^2 - r2^2 + r3^2)
    psi   =  arcsin(2 (r3 r1 - r4 r2))
    omega = -atan2(2 (r4 r3 + r2 r1), r4^2 + r1^2 - r2^2 - r3^2)

    Raises NotUnit on a non-unit input and GimbalSingularity when
    |cos psi| < 1e-12, where the angles are not separable.
    """
    r = np.asarray(r, dtype=float)
    nrm = quat_norm(r)
    if abs(nrm - 1.0) > UNIT_TOL:
        raise NotUnit(f"|r| = {nrm!r} is not 1 within {UNIT_TOL}")
    r1, r2, r3, r4 = r
    sin_psi = 2.0 * (r3 * r1 - r4 * r2)
    # rounding can push the argument a hair past 1 for legal inputs
    sin_psi = min(1.0, max(-1.0, sin_psi))
    if 1.0 - sin_psi * sin_psi < GIMBAL_TOL * GIMBAL_TOL:
        raise GimbalSingularity("cos(psi) vanishes; eps and omega are coupled")
    eps = -np.arctan2(2.0 * (r4 * r1 + r2 * r3), r4 * r4 - r1 * r1 - r2 * r2 + r3 * r3)
    psi = np.arcsin(sin_psi)
    omega = -np.arctan2(2.0 * (r4 * r3 + r2 * r1), r4 * r4 + r1 * r1 - r2 * r2 - r3 * r3)
    return float(eps), float(psi), float(omega)


def unit_quat_from_euler(eps: float, psi: float, omega: float) -> np.ndarray:
    """Unit quaternion whose euler_from_unit_quat is (eps, psi, omega)."""
    qx = np.array([np.sin(-eps / 2.0), 0.0, 0.0, np.cos(-eps / 2.0)])
    qy = np.array([0.0, np.sin(-psi / 2.0), 0.0, np.cos(-psi / 2.0)])
    qz = np.array([0.0, 0.0, np.sin(-omega / 2.0), np.cos(-omega / 2.0)])
    return quat_multiply(qz, quat_multiply(qy, qx))


def quat_multiply(a, b) -> np.ndarray:
    """Hamilton product a * b in vector-first component order."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    av, aw = a[:3], a[3]
    bv, bw = b[:3], b[3]
    return np.concatenate([aw * bv + bw * av + np.cross(av, bv), [aw * bw - av @ bv]])


def translation_from_dualquat(r, s) -> np.ndarray:
    """Translation vector t = 2 W(r)^T s (first three components).

    t_x = 2 (r2 s3 - r1 s4 - r3 s2 + r4 s1)
    t_y = 2 (r3 s1 - r1 s3 - r2 s4 + r4 s2)
    t_z = 2 (r1 s2 - r2 s1 - r3 s4 + r4 s3)
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    return 2.0 * (w_matrix(r).T @ s)[:3]


def scaled_from_unit(r, lam: float) -> np.ndarray:
    """Scaled quaternion sqrt(lambda) * r; its squared norm recovers lambda."""
    if not lam > 0.0:
        raise NonPositiveScale(f"lambda = {lam!r} must be > 0")
    return np.sqrt(lam) * np.asarray(r, dtype=float)


def unit_from_scaled(qs) -> tuple[np.ndarray, float]:
    """Split a scaled quaternion into (unit quaternion, lambda = |qs|^2).

    The sign of the components is preserved; no canonicalization to a
    non-negative scalar part is applied, so round-trips are exact.
    """
    qs = np.asarray(qs, dtype=float)
    lam = float(qs @ qs)
    if lam == 0.0:
        raise ZeroQuaternion("cannot normalize the zero quaternion")
    return qs / np.sqrt(lam), lam


def random_unit_quat(rng, max_angle_rad: float = np.pi) -> np.ndarray:
    """Random rotation quaternion with angle uniform in [0, max_angle_rad]."""
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    ang = rng.uniform(0.0, max_angle_rad)
    return np.concatenate([np.sin(ang / 2.0) * axis, [np.cos(ang / 2.0)]])
