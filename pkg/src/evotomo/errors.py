"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so library code should raise
the most specific class that applies.
"""


class EvotomoError(Exception):
    """Base class for errors raised by this package."""


class DimensionMismatchError(EvotomoError, ValueError):
    """Operands live in incompatible operator spaces."""


class InvalidOperatorError(EvotomoError, ValueError):
    """An operator violates a construction invariant (hermiticity, trace, positivity)."""


class DegenerateProbeError(EvotomoError, ValueError):
    """The probe operator makes the measurement map trivially non-informative
    (observable proportional to the identity, or traceless reference state)."""


class InsufficientSeedError(EvotomoError, ValueError):
    """The seed window is shorter than the minimal-polynomial threshold allows."""

    def __init__(self, message, required):
        super().__init__(message)
        self.required = int(required)


class SpectralAmbiguityError(EvotomoError, ValueError):
    """A spectral quantity (minimal-polynomial degree or zero-block size) could
    not be resolved decisively at the working tolerance."""


class IllConditionedTimesError(EvotomoError, ValueError):
    """The sample-time matrix of the continuous extension is numerically singular;
    re-spacing the sample times usually fixes this."""


class RankDeficientError(EvotomoError, ValueError):
    """A reconstruction was requested from a measurement map that is not injective.

    Carries the injectivity certificate so callers can inspect the singular
    spectrum that triggered the refusal.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class BoundViolationError(EvotomoError, RuntimeError):
    """An empirical Monte-Carlo error exceeded its theoretical bound plus slack."""
