"""Exception hierarchy.

Every error raised by the library derives from :class:`ChronoError`. Input
problems (bad shapes, non-stochastic matrices, malformed files) derive from
:class:`InputError`; failures of a numerical precondition that only show up
after computation derive from :class:`NumericalError`. The CLI maps the two
families to distinct exit codes.
"""


class ChronoError(Exception):
    pass


class InputError(ChronoError, ValueError):
    pass


class NumericalError(ChronoError, ArithmeticError):
    pass


class DimensionMismatch(InputError):
    pass


class NotHermitian(InputError):
    pass


class NotPSD(InputError):
    pass


class DomainViolation(InputError):
    pass


class NotStochastic(InputError):
    pass


class NotDistribution(InputError):
    pass


class NotStationary(InputError):
    pass


class NotTracePreserving(InputError):
    pass


class NotReversalShaped(InputError):
    pass


class SupportViolation(InputError):
    pass


class CompletenessViolation(InputError):
    pass


class InvalidFamily(InputError):
    pass


class FamilyMismatch(InputError):
    pass


class EnumerationCapExceeded(InputError):
    pass


class SingularSigma(NumericalError):
    pass


class SingularState(NumericalError):
    pass


class SingularProcess(NumericalError):
    pass


class ParseError(InputError):
    pass


class SchemaError(InputError):
    pass


class KindMismatch(InputError):
    pass


class UnsupportedKind(InputError):
    pass
