"""Exception hierarchy for the dqhelmert package."""


class DqHelmertError(Exception):
    """Base class for all package-specific errors."""


class NotUnit(DqHelmertError):
    """Quaternion expected to have unit norm does not."""


class GimbalSingularity(DqHelmertError):
    """Euler angles are not separable (cos of the middle angle vanishes)."""


class NonPositiveScale(DqHelmertError):
    """Scale factor must be strictly positive."""


class ZeroQuaternion(DqHelmertError):
    """Quaternion with zero norm cannot be normalized."""


class Singular(DqHelmertError):
    """Matrix is singular to working precision."""


class DimensionMismatch(DqHelmertError):
    """Array dimensions are inconsistent."""


class NonPositiveVariance(DqHelmertError):
    """Variances and weights must be strictly positive."""


class InsufficientPoints(DqHelmertError):
    """At least three control points are required for an adjustment."""


class DegenerateGeometry(DqHelmertError):
    """Control point geometry does not determine the transformation."""


class MaxIterationsExceeded(DqHelmertError):
    """Iteration limit reached before the stop rule was satisfied."""


class SingularNormalMatrix(DqHelmertError):
    """Normal equation system is singular."""


class RotationTooLarge(DqHelmertError):
    """Rotation outside the positive-scalar branch of the reduced solvers."""


class ParseError(DqHelmertError):
    """Input file could not be parsed."""

    def __init__(self, message, path=None, row=None):
        self.path = path
        self.row = row
        where = ""
        if path is not None:
            where += f"{path}"
        if row is not None:
            where += f", row {row}"
        super().__init__(f"{message} ({where})" if where else message)
