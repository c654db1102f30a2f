"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit code 2); numerical
failures derive from :class:`NumericalError` (exit code 3).
"""


class QuantreeError(Exception):
    pass


class InputError(QuantreeError, ValueError):
    pass


class NumericalError(QuantreeError, ArithmeticError):
    pass


# graph-core
class CycleDetected(InputError):
    pass


class Disconnected(InputError):
    pass


class NonPositiveLength(InputError):
    pass


class TooFewLeaves(InputError):
    pass


class NoInternalVertex(InputError):
    pass


class SheafMismatch(InputError):
    pass


class DegenerateSheaf(InputError):
    """A sheaf with a single leaf edge; the local problem is underdetermined."""


class EdgeSetMismatch(InputError):
    pass


class InsufficientSamples(InputError):
    pass


# numerics
class OrderTooLarge(InputError):
    pass


class XOutOfRange(InputError):
    pass


class VanishingF(NumericalError):
    pass


class DenominatorNearZero(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class RankDeficient(NumericalError):
    def __init__(self, msg, condition=None):
        super().__init__(msg)
        self.condition = condition


class RootCountShort(NumericalError):
    pass


class DegenerateMultiplier(NumericalError):
    pass


class SmallDenominator(NumericalError):
    def __init__(self, msg, indices=()):
        super().__init__(msg)
        self.indices = tuple(indices)
