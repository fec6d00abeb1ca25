"""Solver result container shared by all estimation methods."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quat


@dataclass
class SolveResult:
    """Converged similarity transformation estimate.

    The quaternions are stored in unit form regardless of the method that
    produced them; scaled forms are derived via the properties.  Residuals
    are ordered source-frame block first, then target-frame block, and
    satisfy ``adjusted = observed + residual``.

    The covariance backends differ per method: the constrained solver
    retains the inverse of its bordered normal matrix (``m_inverse``),
    the reduced solvers retain the unscaled 7x7 parameter cofactor
    (``qx``).
    """

    method: str
    quat_form: str
    mode: str
    dim: int
    n_points: int
    point_ids: tuple[str, ...]
    lambda_: float
    r: np.ndarray
    s: np.ndarray
    residuals: np.ndarray
    sigma0: float
    dof: int
    dof_2d: int | None
    iterations: int
    converged: bool
    k_a: np.ndarray
    k_b: np.ndarray | None
    m_inverse: np.ndarray | None = None
    qx: np.ndarray | None = None
    param_names: tuple[str, ...] = ()
    condition_log: list[float] = field(default_factory=list)
    objective_log: list[float] = field(default_factory=list)
    delta_log: list[float] = field(default_factory=list)

    @property
    def r_scaled(self) -> np.ndarray:
        return quat.scaled_from_unit(self.r, self.lambda_)

    @property
    def s_scaled(self) -> np.ndarray:
        return self.s / np.sqrt(self.lambda_)

    @property
    def translation(self) -> np.ndarray:
        return quat.translation_from_dualquat(self.r, self.s)

    @property
    def rotation(self) -> np.ndarray:
        return quat.rotation_from_unit_quat(self.r)

    @property
    def euler(self) -> tuple[float, float, float]:
        """(eps, psi, omega) in radians."""
        return quat.euler_from_unit_quat(self.r)

    @property
    def residuals_source(self) -> np.ndarray:
        return self.residuals[: 3 * self.n_points].reshape(self.n_points, 3)

    @property
    def residuals_target(self) -> np.ndarray:
        return self.residuals[3 * self.n_points:].reshape(self.n_points, 3)
