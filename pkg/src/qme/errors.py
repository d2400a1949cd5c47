"""Exception and warning types shared across the package."""


class QmeError(Exception):
    """Base class for all package errors."""


class NotHermitian(QmeError):
    pass


class DimensionMismatch(QmeError):
    pass


class UnsupportedBathKind(QmeError):
    pass


class QuadratureFailure(QmeError):
    pass


class NoConvergence(QmeError):
    pass


class StepTooLarge(QmeError):
    pass


class TooLarge(QmeError):
    pass


class EmptySpectrum(QmeError):
    pass


class NonPositiveData(QmeError):
    pass


class UnitarityLoss(QmeError):
    pass


class ConfigError(QmeError):
    pass


class TraceDrift(UserWarning):
    """Trace of the propagated state drifted beyond tolerance."""


class SpectralLeakage(UserWarning):
    """Floquet FFT spectrum not negligible at the half frequency."""
