"""Exception types shared across the package."""


class GaugeHuboError(Exception):
    """Base class for all package errors."""


class ParseError(GaugeHuboError):
    """Malformed instance or graph file. Carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimensionError(GaugeHuboError):
    """Array length does not match the instance it is evaluated against."""


class SizeGuardError(GaugeHuboError):
    """Instance exceeds a hard size limit (brute force or dense simulation)."""


class MappingError(GaugeHuboError):
    """Polynomial cannot be mapped to a dual gauge graph."""


class GenerationError(GaugeHuboError):
    """Random instance generation failed to converge."""


class ConsistencyError(GaugeHuboError):
    """Internal invariant violated (indicates a bug, not bad input)."""


class DivergenceError(GaugeHuboError):
    """Annealer state left the finite range. Carries the iteration index."""

    def __init__(self, message: str, iteration: int):
        self.iteration = iteration
        super().__init__(f"{message} (iteration {iteration})")
