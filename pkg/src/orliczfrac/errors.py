"""Exception types shared across the library."""


class OrliczFracError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(OrliczFracError, ValueError):
    """A parameter violates a documented precondition."""


class InvalidFunctionError(OrliczFracError, ValueError):
    """A candidate growth function fails a structural requirement."""


class InvalidInputError(OrliczFracError, ValueError):
    """Inputs are inconsistent with each other (e.g. mesh mismatch)."""


class UnsupportedDimensionError(OrliczFracError, ValueError):
    """Ambient dimension outside the supported set {1, 2, 3}."""


class NumericOverflowError(OrliczFracError, ArithmeticError):
    """A bracketing or expansion loop exceeded its growth limit."""


class ToleranceNotMetError(OrliczFracError, ArithmeticError):
    """Quadrature failed to reach the requested accuracy.

    The best available estimate is kept in ``achieved``.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class DivergentModularError(OrliczFracError, ArithmeticError):
    """The modular stays above 1 for every scaling in the search range."""


class UndefinedRatioError(OrliczFracError, ZeroDivisionError):
    """A ratio of modulars is requested for an identically zero function."""


class DegenerateMollifierWarning(UserWarning):
    """Mollification width below one mesh spacing; input returned unchanged."""


class UniquenessWarning(UserWarning):
    """The growth function is not strictly convex on the screening grid."""


class ConfigError(OrliczFracError, ValueError):
    """Experiment config rejected; ``errors`` lists (line, message) pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        lines = "; ".join(f"line {ln}: {msg}" for ln, msg in self.errors)
        super().__init__(lines or "invalid config")
