"""Exception types raised by the construction and certification routines."""


class CircleSkewError(Exception):
    """Base class for all errors raised by this package."""


class InvalidMap(CircleSkewError, ValueError):
    """A circle map violates the diffeomorphism bound."""


class EmptyWord(CircleSkewError, ValueError):
    pass


class InvarianceViolated(CircleSkewError):
    """T_w(J) is not contained in J."""


class NotContraction(CircleSkewError):
    """The certified derivative bound of T_w on J is not below 1."""


class NoConvergence(CircleSkewError):
    pass


class NotFixed(CircleSkewError):
    """A point handed in as a fixed point fails the residual check."""


class NoCoverFound(CircleSkewError):
    """Word search exhausted without an expanding cover of the circle."""


class NotACover(CircleSkewError):
    pass


class SearchExhausted(CircleSkewError):
    pass


class ExponentTooLarge(CircleSkewError):
    """1 - d|lambda| <= 0, so the good-approximation mass bound is vacuous."""


class ParamSearchFailed(CircleSkewError):
    pass


class ChaseFailed(CircleSkewError):
    pass


class LandingFailed(CircleSkewError):
    pass


class ContractionFailed(CircleSkewError):
    pass


class HypothesisFailed(CircleSkewError):
    """A standing hypothesis (minimality, expansion, attracting seed) was not certified."""


class ConfigError(CircleSkewError, ValueError):
    pass


class StageError(CircleSkewError):
    """Wraps an error raised while building a given stage of a sequence."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage}: {type(cause).__name__}: {cause}")
