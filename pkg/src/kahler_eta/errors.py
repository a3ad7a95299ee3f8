"""Exception hierarchy shared by all modules."""


class GeometryError(Exception):
    """Base class for every error raised by this package."""


class DegenerateMetricError(GeometryError, ValueError):
    pass


class DomainError(GeometryError, ValueError):
    """A query fell outside the set where a field or map is defined."""


class UnsupportedDimensionError(GeometryError, ValueError):
    pass


class DegenerateLevelSetError(GeometryError, ValueError):
    pass


class PoleError(GeometryError, ZeroDivisionError):
    pass


class InvalidProfileError(GeometryError, ValueError):
    pass


class CalibrationError(GeometryError, RuntimeError):
    """Root solve failed; ``trace`` holds the residuals that were tried."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class OverconstrainedError(GeometryError, ValueError):
    pass


class HypothesisViolationError(GeometryError, ValueError):
    pass


class DivergenceError(GeometryError, ArithmeticError):
    pass


class ProbeError(GeometryError, ValueError):
    pass


class ValidityError(GeometryError, ValueError):
    pass


class ConventionError(GeometryError, ValueError):
    pass


class DegeneratePairingError(GeometryError, ZeroDivisionError):
    pass


class ConfigError(GeometryError, ValueError):
    """Config parsing failed. ``errors`` is a list of located messages."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors))
