"""Exception types shared across the package."""


class IsoskelError(Exception):
    """Base class for all package errors."""


class DegenerateContact(IsoskelError):
    """Tangency at the origin is too degenerate to classify."""


class NotUmbilic(IsoskelError):
    """Operation requires an elliptic umbilic origin."""


class GenericityViolated(IsoskelError):
    """A genericity assumption (b1 != b3 after normalisation) fails."""


class SingularLevel(IsoskelError):
    """Continuation hit a point with vanishing gradient on the level set."""


class SingularPoint(IsoskelError):
    """Pointwise quantity undefined because the gradient is below floor."""


class TraceDivergence(IsoskelError):
    """Predictor-corrector failed to converge after step halving."""


class CollinearPoints(IsoskelError):
    """No unique circle through three (nearly) collinear points."""


class DegenerateAllPairs(IsoskelError):
    """Every parameter pair is bitangent (the curve is a circle)."""


class PathLost(IsoskelError):
    """Continuation in k lost a solution path; carries the partial path."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InsufficientPath(IsoskelError):
    """Too few rungs on a tracked path to fit the centre-locus series."""


class UnstableCounts(IsoskelError):
    """Feature counts on the two smallest rungs disagree; carries the report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class BadSurfaceFile(IsoskelError):
    """Surface/family specification file failed validation."""
