"""Exception hierarchy.

Input problems derive from ``ValidationError`` (a ``ValueError``); inputs the
analytic solver does not cover derive from ``UnsupportedCase``.
"""


class UQSDError(Exception):
    pass


class ValidationError(UQSDError, ValueError):
    pass


class DimensionMismatch(ValidationError):
    pass


class UnnormalizedState(ValidationError):
    pass


class LinearlyDependent(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class BadPriors(ValidationError):
    pass


class WrongArity(ValidationError):
    pass


class UnsupportedCase(UQSDError):
    pass


class UnsupportedComplexCase(UnsupportedCase):
    """Three states with complex Gamma and unequal alpha_i*sqrt(eta_i)."""


class NotEquilateral(UnsupportedCase):
    pass


class DegenerateReduction(UQSDError):
    """A kept state has no component orthogonal to the dropped one."""


class TriangleClosureFailure(UQSDError):
    pass
