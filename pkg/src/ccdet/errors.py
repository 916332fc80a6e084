"""Exception types shared across the package.

Every error raised on purpose by this package derives from CcdetError, so
callers can catch one base class at an API boundary. The subclasses separate
input-validation failures (dimensions, probabilities, priors, scalar domains)
from numeric failures (rank deficiency, singular covariances) and from
design-search failures (empty feasible set, unknown figure preset).
"""

from __future__ import annotations


class CcdetError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(CcdetError):
    """An array shape, length, or count is inconsistent or out of range."""


class ProbabilityError(CcdetError):
    """A probability or probability sum lies outside [0, 1]."""


class PriorError(CcdetError):
    """Hypothesis priors are negative or do not sum to one."""


class DomainError(CcdetError):
    """A scalar argument lies outside the domain of the requested quantity."""


class RankError(CcdetError):
    """A projection draw stayed rank-deficient after the retry budget."""


class ZeroVectorError(CcdetError):
    """A direction argument has zero norm."""


class SingularCovarianceError(CcdetError):
    """A covariance matrix is not symmetric positive definite."""


class InfeasibleError(CcdetError):
    """A constrained design search found no feasible grid point."""


class UnknownFigureError(CcdetError):
    """A figure preset identifier is not one of the published presets."""
