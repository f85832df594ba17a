"""Exception hierarchy shared by all ljensen modules."""


class LJensenError(Exception):
    """Base class for library errors."""


class InvalidParams(LJensenError, ValueError):
    pass


class NoConvergence(LJensenError, ArithmeticError):
    pass


class PrecisionInsufficient(LJensenError, ArithmeticError):
    """Raised when a requested accuracy cannot be met at the working precision.

    Callers may retry with ``ctx.escalate()``.
    """


class BadBracket(LJensenError, ValueError):
    pass


# theta
class NotFundamental(InvalidParams):
    pass


class NotNormalized(InvalidParams):
    pass


class EmptyStream(InvalidParams):
    pass


class NotReduced(InvalidParams):
    pass


class WrongDiscriminant(InvalidParams):
    pass


class EmptyBound(InvalidParams):
    pass


class CoefficientOverflow(LJensenError, OverflowError):
    pass


class NoDecayProof(LJensenError):
    pass


class InsufficientTerms(NoDecayProof):
    """A finite coefficient list is too short for the requested truncation."""


class CoefficientFileError(InvalidParams):
    pass


# lfunction
class OddWeight(InvalidParams):
    pass


class InvalidEpsF(InvalidParams):
    pass


class CacheCorrupt(LJensenError):
    pass


class Inconclusive(LJensenError):
    pass


# asymptotics
class NonpositiveCurvature(LJensenError, ArithmeticError):
    pass


class NegativeRadicand(LJensenError, ArithmeticError):
    pass


class ShiftTooLarge(InvalidParams):
    pass


# jensen
class MissingRecord(LJensenError, KeyError):
    pass


class LeadingIntervalContainsZero(LJensenError, ArithmeticError):
    pass


class DegreeMismatch(InvalidParams):
    pass
