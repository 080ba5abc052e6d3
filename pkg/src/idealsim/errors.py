"""Exception hierarchy.

Every failure raised by the library derives from :class:`IdealSimError`.
The three intermediate classes map onto the CLI exit codes: input problems
(2), violated preconditions (3) and numerical breakdown (4).
"""


class IdealSimError(Exception):
    """Base class for all library errors."""

    code = "error"


class InvalidInput(IdealSimError, ValueError):
    code = "invalid-input"


class PreconditionViolation(IdealSimError, ValueError):
    code = "precondition-violation"


class NumericalFailure(IdealSimError, ArithmeticError):
    code = "numerical-failure"


class NotPSD(PreconditionViolation):
    code = "not-psd"


class SpectralRadiusViolation(PreconditionViolation):
    code = "spectral-radius-violation"


class NotCommuting(PreconditionViolation):
    code = "not-commuting"


class AttainmentUnavailable(PreconditionViolation):
    code = "attainment-unavailable"


class SingularSimilarity(PreconditionViolation):
    code = "singular-similarity"


class QuotientEmpty(PreconditionViolation):
    code = "quotient-empty"


class NotInSigma(PreconditionViolation):
    code = "not-in-sigma"


class NotAnnihilated(PreconditionViolation):
    code = "not-annihilated"


class GenerationFailure(PreconditionViolation):
    code = "generation-failure"


class TheoremViolation(NumericalFailure):
    """A lower bound that must hold for every similarity was broken.

    This always indicates a bug in the implementation, never in the
    mathematics.
    """

    code = "theorem-violation"
