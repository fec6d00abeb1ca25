"""Similarity (Helmert) transformation estimation with dual quaternions.

Estimates 2D/3D similarity transformation parameters between two noisy
coordinate frames (errors in both), with three interchangeable solvers:

- :func:`solve_constrained`: dual quaternion with explicit unity and
  orthogonality constraints (bordered normal system); also available in a
  scaled-quaternion variant (:func:`solve_scaled`).
- :func:`solve_simplified`: unconstrained dual quaternion with the
  dependent components eliminated analytically.
- :func:`solve_qa`: single-quaternion reference with explicit translation
  unknowns.

All three return a :class:`SolveResult` and full precision information
(standard errors of the quaternions and of the six geometric parameters)
through the covariance functions.
"""

from .constrained import (
    LinearizedSystem,
    closure_check,
    eval_model,
    linearize,
    solve_constrained,
    solve_scaled,
    transform_point,
)
from .errors import (
    DegenerateGeometry,
    DimensionMismatch,
    DqHelmertError,
    GimbalSingularity,
    InsufficientPoints,
    MaxIterationsExceeded,
    NonPositiveScale,
    NonPositiveVariance,
    NotUnit,
    ParseError,
    RotationTooLarge,
    Singular,
    SingularNormalMatrix,
    ZeroQuaternion,
)
from .precision import (
    CovarianceReport,
    SixParams,
    covariance_constrained,
    six_param_covariance,
)
from .problem import (
    ControlPointPair,
    FullWeightMatrix,
    PerPointScalarWeights,
    PerPointVariances,
    Problem,
    UnitWeights,
    build_weight_matrix,
    validate_problem,
)
from .qa import covariance_qa, solve_qa
from .result import SolveResult
from .simplified import covariance_simplified, dependent_quats, solve_simplified

__version__ = "0.1.0"

__all__ = [
    "ControlPointPair",
    "CovarianceReport",
    "DegenerateGeometry",
    "DimensionMismatch",
    "DqHelmertError",
    "FullWeightMatrix",
    "GimbalSingularity",
    "InsufficientPoints",
    "LinearizedSystem",
    "MaxIterationsExceeded",
    "NonPositiveScale",
    "NonPositiveVariance",
    "NotUnit",
    "ParseError",
    "PerPointScalarWeights",
    "PerPointVariances",
    "Problem",
    "RotationTooLarge",
    "Singular",
    "SingularNormalMatrix",
    "SixParams",
    "SolveResult",
    "UnitWeights",
    "ZeroQuaternion",
    "build_weight_matrix",
    "closure_check",
    "covariance_constrained",
    "covariance_qa",
    "covariance_simplified",
    "dependent_quats",
    "eval_model",
    "linearize",
    "six_param_covariance",
    "solve_constrained",
    "solve_qa",
    "solve_scaled",
    "solve_simplified",
    "transform_point",
    "validate_problem",
]
