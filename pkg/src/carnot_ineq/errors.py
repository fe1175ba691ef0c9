"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`CarnotError`,
so callers (the CLI in particular) can map failures to exit codes by class.
"""


class CarnotError(Exception):
    """Base class for library errors."""

    #: machine-readable reason string used in CLI reports
    @property
    def reason(self) -> str:
        return type(self).__name__


class ValidationError(CarnotError, ValueError):
    """Invalid input data (group definitions, parameters, configs)."""


class SkewViolation(ValidationError):
    pass


class DependentMatrices(ValidationError):
    pass


class BadDimension(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class InvalidParameter(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class OriginSingular(CarnotError, ZeroDivisionError):
    """A closed form was evaluated at the group identity, where it is singular."""


class ZeroHorizontal(CarnotError, ZeroDivisionError):
    """A quantity normalised by |x| was requested at a point with x = 0."""


class RuntimeFailure(CarnotError, RuntimeError):
    """Numerical procedure did not succeed."""


class TailNotConverged(RuntimeFailure):
    pass


class AdaptationFailed(RuntimeFailure):
    pass


class EmptySupportSample(RuntimeFailure):
    pass


class SupportViolation(CarnotError, ValueError):
    pass


class DegenerateFunction(CarnotError, ValueError):
    pass


class Infeasible(CarnotError, ValueError):
    pass
