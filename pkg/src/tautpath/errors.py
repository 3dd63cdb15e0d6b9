"""Exception types shared across the package."""


class TautPathError(Exception):
    """Base class for all package-specific errors."""


class NonConvergence(TautPathError):
    """An iterative routine exhausted its iteration budget."""


class DegenerateGradient(TautPathError):
    """The level-set gradient vanished where a normal or projection was needed."""


class NotTangent(TautPathError):
    """A vector handed to the second fundamental form was not tangent."""


class DegenerateCurve(TautPathError):
    """The curve has (numerically) zero total length."""


class NotConstantSpeed(TautPathError):
    """An operation requiring near-uniform node spacing got an uneven curve."""


class InfeasiblePoint(TautPathError):
    """A query point lies inside or on the obstacle where it must be exterior."""


class InfeasibleEndpoints(InfeasiblePoint):
    """A curve endpoint lies inside or on the obstacle."""


class EmptyInput(TautPathError):
    """No usable items were supplied (e.g. no converged solves to cluster)."""


class InsufficientData(TautPathError):
    """Too few data points to estimate the requested quantity."""


class ConfigError(TautPathError):
    """A configuration file or value failed validation."""
