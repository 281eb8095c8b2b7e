"""Exception types raised across the package."""


class ComptonWitnessError(ValueError):
    """Base class for all errors raised by this package."""


class NotHermitian(ComptonWitnessError):
    pass


class BadDim(ComptonWitnessError):
    pass


class BadLambda(ComptonWitnessError):
    pass


class DimMismatch(ComptonWitnessError):
    pass


class BadWeight(ComptonWitnessError):
    pass


class SizeMismatch(ComptonWitnessError):
    pass


class Unsupported(ComptonWitnessError):
    pass


class BadCount(ComptonWitnessError):
    pass


class BadConfig(ComptonWitnessError):
    pass


class BadStateSpec(ComptonWitnessError):
    pass


class InsufficientStatistics(ComptonWitnessError):
    """Raised when an azimuth window holds too few events to form an estimate."""
