"""Exception and warning classes.

Errors split into two families mirroring the CLI exit codes: bad input
(:class:`ValidationError`, exit 2) and failures of a computation on valid
input (:class:`ComputationError`, exit 3).
"""


class ModulidimError(Exception):
    exit_code = 1


class ValidationError(ModulidimError, ValueError):
    exit_code = 2


class ComputationError(ModulidimError, ArithmeticError):
    exit_code = 3


class NotCoprime(ValidationError):
    pass


class MissingWeights(ValidationError):
    pass


class InconsistentTopology(ValidationError):
    pass


class NegativeH11(ValidationError):
    pass


class Unsupported(ValidationError):
    pass


class NonPolynomial(ComputationError):
    pass


class RationalizationFailed(ComputationError):
    pass


class DegenerateMetric(ComputationError):
    pass


class InconsistentFormulas(ComputationError):
    pass


class ConventionError(ComputationError):
    """No Maurer-Cartan convention makes the transverse metric Einstein."""


class NoWitness(ComputationError):
    pass


class IntegralityWarning(UserWarning):
    """An index that must be an integer came out fractional."""


class QuasiRegularWarning(UserWarning):
    """Rank-2 extraction applied to a quasi-regular Y^{p,q}."""
