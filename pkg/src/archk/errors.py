"""Exception hierarchy.

Everything raised on bad input derives from :class:`DomainError` (a
``ValueError``); numerical breakdowns derive from :class:`NumericalError`.
The CLI maps the two families to exit codes 2 and 3.
"""


class ArchkError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ArchkError, ValueError):
    """Invalid space, configuration, hyperparameter or input data."""


class NumericalError(ArchkError, ArithmeticError):
    """A numerical routine failed on input that passed validation."""


# space structure
class CycleDetected(DomainError):
    pass


class GovernorNotCategorical(DomainError):
    pass


class ClauseValueOutsideDomain(DomainError):
    pass


class DuplicateDimensionId(DomainError):
    pass


class EmptyBounds(DomainError):
    pass


class TooFewCategories(DomainError):
    pass


class UnknownDimension(DomainError, KeyError):
    def __str__(self):
        return ValueError.__str__(self)


class SchemaError(DomainError):
    """Malformed JSON/CSV description (unknown keys, wrong types)."""


# configurations
class UndecidableActivity(DomainError):
    pass


class MissingActiveValue(DomainError):
    pass


class ValueOutOfBounds(DomainError):
    pass


class UnknownCategory(DomainError):
    pass


class MissingValue(DomainError):
    pass


# metric / kernel hyperparameters
class MissingGamma(DomainError):
    pass


class GammaOutOfRange(DomainError):
    pass


class InvalidCategoryCount(DomainError):
    pass


class InvalidHyperparameter(DomainError):
    pass


class NegativeDistance(DomainError):
    pass


class EmptyInput(DomainError):
    pass


class DimensionMismatch(DomainError):
    pass


class AsymmetricInput(DomainError):
    pass


# numerical
class NotFactorizable(NumericalError):
    pass


class AllCandidatesFailed(NumericalError):
    pass
