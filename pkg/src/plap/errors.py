"""Exception hierarchy shared across the package."""


class PlapError(Exception):
    """Base class for all errors raised by plap."""


class UnsupportedExponent(PlapError, ValueError):
    """The exponent is outside the degenerate range p > 2."""


class DomainError(PlapError, ValueError):
    """A point lies outside the domain where a formula is defined."""


class SingularAtZero(DomainError):
    """A power term has a non-positive exponent and x = 0 was requested."""


class MissingDerivative(PlapError, ValueError):
    """An operation needs a declared derivative that the field does not carry."""


class GridMismatch(PlapError, ValueError):
    """Two grid-based objects do not share the same nodes."""


class NonVariational(PlapError, ValueError):
    """The energy functional only exists for zero drift."""


class PreconditionError(PlapError, ValueError):
    """An operation was called on an instance it does not support."""


class NoBracket(PlapError, RuntimeError):
    """The shooting map never changed sign over the escalated search range."""


class NewtonDiverged(PlapError, RuntimeError):
    """Damped Newton failed to reduce the residual."""

    def __init__(self, message: str, stage: float | None = None, residual: float | None = None):
        super().__init__(message)
        self.stage = stage
        self.residual = residual


class InadmissibleParameters(PlapError, ValueError):
    """Theta-family parameters violate the admissibility bounds."""


class NotAContactPoint(PlapError, ValueError):
    """The requested point is not a contact point of the pair."""


class HypothesisNotMet(PlapError, ValueError):
    """No strict-ordering interval is adjacent to the contact point."""


class NoContactPoint(PlapError, ValueError):
    """The pair has no interior contact point."""


class StructureViolation(PlapError, RuntimeError):
    """The strict set splits into several components although the reaction vanishes."""


class NonMonotoneShooting(UserWarning):
    """The sampled shooting map was not monotone in the integration constant."""
