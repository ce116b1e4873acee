"""Exception hierarchy shared by all metasir modules."""


class MetaSirError(Exception):
    """Base class for numerical failures raised by this package."""


class PoleError(MetaSirError, ValueError):
    """Argument sits on a pole of the gamma function."""


class UndefinedError(MetaSirError, ValueError):
    """Quantity is mathematically undefined at the requested arguments."""


class ConvergenceError(MetaSirError, ArithmeticError):
    """A series or quadrature failed to reach its tolerance."""


class DomainError(MetaSirError, ValueError):
    """Argument outside the domain an operation is defined on."""


class TailError(ConvergenceError):
    """The Gil-Pelaez tail could not be certified below tolerance."""


class MissingMoment(MetaSirError, KeyError):
    """A bound needs a moment order that the moment set does not carry."""


class DegenerateMoments(MetaSirError, ValueError):
    """Moment vector makes a four-moment case denominator vanish."""


class InfeasibleMoments(MetaSirError, ValueError):
    """Moments cannot belong to a random variable on (0, 1)."""


class MomentDoesNotExist(MetaSirError, ValueError):
    """Requested moment of a fitted distribution diverges."""


class NegativeMomentDivergence(MetaSirError, ArithmeticError):
    """A negative-order moment is infinite (denominator is not positive)."""


class ConfigError(MetaSirError, ValueError):
    """Simulation configuration cannot deliver the requested accuracy."""


class EmptyRealization(MetaSirError, RuntimeError):
    """A point-process realization contained no base station."""
