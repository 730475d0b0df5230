"""Exception and warning classes shared across the package."""


class DeltanError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(DeltanError, ValueError):
    """A parameter is outside its admissible range."""


class InvalidDimensionError(InvalidParameterError):
    pass


class InvalidSectorError(InvalidParameterError):
    pass


class InvalidWindowError(InvalidParameterError):
    pass


class DomainError(InvalidParameterError):
    pass


class OrderingError(DeltanError, ValueError):
    """Levels or spacings violate the required ordering."""


class PartitionError(DeltanError, ValueError):
    pass


class DegenerateSequenceError(DeltanError, ValueError):
    pass


class ShapeError(DeltanError, ValueError):
    pass


class SampleSizeError(DeltanError, ValueError):
    pass


class ResourceError(DeltanError):
    pass


class DiagonalizationError(DeltanError, RuntimeError):
    def __init__(self, message, seed=None):
        super().__init__(message if seed is None else f"{message} (seed={seed!r})")
        self.seed = seed


class NumericalConsistencyError(DeltanError, ArithmeticError):
    pass


class CalibrationError(DeltanError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(DeltanError):
    def __init__(self, message, path=None):
        super().__init__(message if path is None else f"{path}: {message}")
        self.path = path


class StageError(DeltanError):
    """Wraps a downstream failure with the pipeline stage it came from."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


class BundleError(DeltanError):
    pass


class ConditioningWarning(UserWarning):
    pass


class MonotonicityWarning(UserWarning):
    pass


class DegenerateReferenceWarning(UserWarning):
    pass


class ClampWarning(UserWarning):
    pass
