"""Exception hierarchy shared by all modules."""


class GGCError(Exception):
    """Base class for every error raised by the toolkit."""


class InputError(GGCError, ValueError):
    """An input violates a documented precondition."""


class NumericalFailure(GGCError, ArithmeticError):
    """A computation finished but its own verification residual is too large."""


# numerics
class NotHermitian(InputError):
    pass


# markov
class Disconnected(InputError):
    pass


class NotReversible(InputError):
    pass


class NotIrreducible(InputError):
    pass


class CrossComponent(InputError):
    pass


class OverlappingSupport(InputError):
    pass


# reflection
class InfeasibleInput(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class SingularScaling(InputError):
    pass


class InvalidWitness(InputError):
    pass


class FractionMismatch(InputError):
    pass


class ScheduleMismatch(InputError):
    pass


# composition
class InvalidInstance(InputError):
    pass


class NotCut(InputError):
    pass


class UnsupportedShape(InputError):
    pass


class NotConnected(InputError):
    pass


class OutputMismatch(InputError):
    pass


# transducer
class NotOrthogonal(InputError):
    pass


# dectree
class NoConvergence(NumericalFailure):
    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class InvalidColoring(InputError):
    pass


class InvalidScheme(InputError):
    pass


# qwalk
class SupportViolation(InputError):
    pass


class NotNormalized(InputError):
    pass


class NotUnique(InputError):
    pass


# catalog
class AllZeroInput(InputError):
    pass


class NotDistinct(InputError):
    pass


# cli
class SchemaError(InputError):
    pass
