"""Exception types raised across the package."""


class FarfieldError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(FarfieldError, ValueError):
    pass


class KernelSingularityError(FarfieldError, ValueError):
    """A kernel with a singularity was evaluated at coincident points."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class PointFileError(FarfieldError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NoTargetsError(FarfieldError, ValueError):
    pass


class IllConditionedSkeletonError(FarfieldError, ArithmeticError):
    """The leading triangular block of the pivoted QR is numerically singular."""


class NumericalError(FarfieldError, ArithmeticError):
    pass


class SamplingError(FarfieldError, ValueError):
    pass


class SearchFailure(FarfieldError, RuntimeError):
    def __init__(self, message, profile=None):
        super().__init__(message)
        self.profile = profile or []


class ConfigError(FarfieldError, ValueError):
    pass
