"""Problem definition: control point pairs, stochastic models, validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DimensionMismatch, NonPositiveVariance


@dataclass(frozen=True)
class ControlPointPair:
    """One point with coordinates in the source (x, y, z) and target (X, Y, Z) frames."""

    id: str
    x: float
    y: float
    z: float
    X: float
    Y: float
    Z: float

    @property
    def source(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def target(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.Z])


@dataclass(frozen=True)
class UnitWeights:
    """Identity weight matrix: all coordinates equally trusted."""


@dataclass(frozen=True)
class PerPointVariances:
    """One variance per point and frame (m^2), applied to all three coordinates."""

    var_source: tuple[float, ...]
    var_target: tuple[float, ...]


@dataclass(frozen=True)
class PerPointScalarWeights:
    """One dimensionless weight per point, applied to all six coordinates."""

    weights: tuple[float, ...]


@dataclass(frozen=True)
class FullWeightMatrix:
    """Explicit 6n x 6n symmetric positive definite weight matrix."""

    matrix: np.ndarray


WeightModel = Union[UnitWeights, PerPointVariances, PerPointScalarWeights, FullWeightMatrix]


@dataclass(frozen=True)
class Problem:
    """A symmetric or asymmetric similarity transformation adjustment problem.

    The residual (and weight) ordering is all source-frame coordinates
    (x1, y1, z1, ..., xn, yn, zn) followed by all target-frame coordinates.
    ``sigma1_sq`` and ``sigma2_sq`` are the unit-weight variances of the two
    frames; they default to 1 and rescale the respective weight blocks.
    """

    points: tuple[ControlPointPair, ...]
    weights: WeightModel = field(default_factory=UnitWeights)
    mode: str = "symmetric"          # symmetric | asymmetric
    dim: int = 3                     # 2 | 3
    sigma1_sq: float = 1.0
    sigma2_sq: float = 1.0

    def __post_init__(self):
        if self.mode not in ("symmetric", "asymmetric"):
            raise ValueError(f"mode must be symmetric or asymmetric, got {self.mode!r}")
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim!r}")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def source(self) -> np.ndarray:
        return np.array([[p.x, p.y, p.z] for p in self.points])

    @property
    def target(self) -> np.ndarray:
        return np.array([[p.X, p.Y, p.Z] for p in self.points])

    @property
    def dof(self) -> int:
        """Redundancy 3n - 7 of the three-dimensional adjustment."""
        return 3 * self.n - 7

    @property
    def dof_2d(self) -> int:
        """Redundancy 2n - 4 of a plane similarity; reported alongside dof in 2D mode."""
        return 2 * self.n - 4


def build_weight_matrix(problem: Problem) -> np.ndarray:
    """Assemble the unified 6n x 6n weight matrix.

    Block diagonal: source-frame weights first, then target-frame weights,
    matching the residual ordering.  Raises NonPositiveVariance or
    DimensionMismatch for invalid stochastic models.
    """
    diag = weight_diagonal(problem)
    if diag is not None:
        return np.diag(diag)
    model = problem.weights
    n = problem.n
    p = np.asarray(model.matrix, dtype=float)
    if p.shape != (6 * n, 6 * n):
        raise DimensionMismatch(f"weight matrix shape {p.shape}, expected {(6 * n, 6 * n)}")
    if not np.allclose(p, p.T, rtol=0.0, atol=1e-10 * max(1.0, np.max(np.abs(p)))):
        raise NonPositiveVariance("full weight matrix must be symmetric")
    if np.min(np.linalg.eigvalsh(0.5 * (p + p.T))) <= 0.0:
        raise NonPositiveVariance("full weight matrix must be positive definite")
    p = p.copy()
    p[:3 * n, :3 * n] *= problem.sigma1_sq
    p[3 * n:, 3 * n:] *= problem.sigma2_sq
    return p


def weight_diagonal(problem: Problem):
    """Diagonal of the weight matrix, or None when the model is a full matrix."""
    model = problem.weights
    n = problem.n
    if isinstance(model, UnitWeights):
        w_src = np.ones(3 * n)
        w_dst = np.ones(3 * n)
    elif isinstance(model, PerPointVariances):
        vs = np.asarray(model.var_source, dtype=float)
        vt = np.asarray(model.var_target, dtype=float)
        if len(vs) != n or len(vt) != n:
            raise DimensionMismatch(f"{len(vs)}/{len(vt)} variances for {n} points")
        if np.any(vs <= 0.0) or np.any(vt <= 0.0):
            raise NonPositiveVariance("point variances must be > 0")
        w_src = np.repeat(1.0 / vs, 3)
        w_dst = np.repeat(1.0 / vt, 3)
    elif isinstance(model, PerPointScalarWeights):
        w = np.asarray(model.weights, dtype=float)
        if len(w) != n:
            raise DimensionMismatch(f"{len(w)} weights for {n} points")
        if np.any(w <= 0.0):
            raise NonPositiveVariance("point weights must be > 0")
        w_src = np.repeat(w, 3)
        w_dst = np.repeat(w, 3)
    else:
        return None
    return np.concatenate([problem.sigma1_sq * w_src, problem.sigma2_sq * w_dst])


@dataclass(frozen=True)
class Diagnostic:
    severity: str    # "error" | "warning"
    message: str


COLLINEAR_RTOL = 1e-9


def validate_problem(problem: Problem) -> list[Diagnostic]:
    """Check a problem for defects; returns diagnostics instead of raising.

    Errors: fewer than three points, duplicate ids, non-finite coordinates,
    invalid weight model, non-zero z in 2D mode.  Warning: (near-)collinear
    points, where the rotation about the common line is unobservable.
    """
    out: list[Diagnostic] = []
    n = problem.n
    if n < 3:
        out.append(Diagnostic("error", f"insufficient control points: {n} < 3"))
    ids = [p.id for p in problem.points]
    for dup in sorted({i for i in ids if ids.count(i) > 1}):
        out.append(Diagnostic("error", f"duplicated point id {dup!r}"))
    coords = np.hstack([problem.source, problem.target]) if n else np.empty((0, 6))
    if n and not np.all(np.isfinite(coords)):
        out.append(Diagnostic("error", "non-finite coordinate"))
    if problem.dim == 2 and n:
        if np.any(problem.source[:, 2] != 0.0) or np.any(problem.target[:, 2] != 0.0):
            out.append(Diagnostic("error", "2D mode requires z = Z = 0 exactly"))
    try:
        weight_diagonal(problem)
        if isinstance(problem.weights, FullWeightMatrix):
            build_weight_matrix(problem)
    except (NonPositiveVariance, DimensionMismatch) as exc:
        out.append(Diagnostic("error", str(exc)))
    if n >= 3 and np.all(np.isfinite(coords)):
        k = problem.dim
        for label, pts in (("source", problem.source[:, :k]), ("target", problem.target[:, :k])):
            centered = pts - pts.mean(axis=0)
            sv = np.linalg.svd(centered, compute_uv=False)
            # collinearity: second singular value of the centered point matrix
            if sv[0] == 0.0 or sv[1] <= COLLINEAR_RTOL * sv[0]:
                out.append(Diagnostic("warning", f"{label} points are (near-)collinear"))
    return out
