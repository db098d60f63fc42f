"""Exception types shared across the library."""


class DimensionMismatchError(ValueError):
    """Operands have incompatible dimensions."""


class InvalidMetricError(ValueError):
    """Metric matrix is not symmetric positive definite."""


class ParameterRangeError(ValueError):
    """A curvature parameter lies outside its admissible range."""


class ConfigError(ValueError):
    """Invalid configuration (horizon, pool, file format, ...)."""


class AssumptionViolationError(RuntimeError):
    """A boundedness assumption (gradient bound G, diameter D) does not hold."""


class InvariantError(RuntimeError):
    """An internal invariant that should be unbreakable was broken."""


class NumericError(RuntimeError):
    """Non-finite values encountered during a run."""

    def __init__(self, message: str, round_index: int | None = None):
        if round_index is not None:
            message = f"{message} (round {round_index})"
        super().__init__(message)
        self.round_index = round_index
