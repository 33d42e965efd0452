"""Exception hierarchy shared by all modules."""


class MbdpssError(Exception):
    """Base class for errors raised by this package."""


class ParameterOutOfRange(MbdpssError, ValueError):
    pass


class DimensionMismatch(MbdpssError, ValueError):
    pass


class EigensolverFailure(MbdpssError, RuntimeError):
    pass


class DivisibilityViolation(ParameterOutOfRange):
    """Random demodulator asked for M rows that do not divide N."""


class EmptySupport(MbdpssError, ValueError):
    pass


class ZeroSignal(MbdpssError, ValueError):
    pass


class RootFindFailure(MbdpssError, RuntimeError):
    """The Lagrange-multiplier search of a norm-constrained least squares failed."""


class ParameterViolation(MbdpssError, ValueError):
    """Solver precondition broken (e.g. CoSaMP with fewer than 3S measurements)."""


class ZeroTruth(ZeroSignal):
    """SNR requested against an all-zero reference signal."""
