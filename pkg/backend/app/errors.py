"""Exception hierarchy shared by every module of the package."""


class HashDesignError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 2


class VerificationFailure(HashDesignError):
    """A checked mathematical statement did not hold."""

    exit_code = 1


# finite_field
class NotPrimeError(HashDesignError, ValueError):
    pass


class ReducibleModulusError(HashDesignError, ValueError):
    pass


class UnsupportedSizeError(HashDesignError, ValueError):
    pass


class ZeroInverseError(HashDesignError, ZeroDivisionError):
    pass


class BadLengthError(HashDesignError, ValueError):
    pass


# hash_family
class DomainError(HashDesignError, LookupError):
    pass


class UnsupportedParametersError(HashDesignError, ValueError):
    pass


class BudgetExceededError(HashDesignError):
    pass


# verify
class NotRegularError(HashDesignError):
    pass


class NotHomomorphicError(HashDesignError):
    pass


class TrivialDomainError(HashDesignError, ValueError):
    pass


class InfeasibleEpsilonError(HashDesignError, ValueError):
    pass


# designs
class NotAMosaicError(HashDesignError, ValueError):
    pass


class SearchBudgetExceededError(HashDesignError):
    pass


class BadLabelingError(HashDesignError, ValueError):
    pass


class StructureViolationError(VerificationFailure):
    pass


# construct
class NotLatinSquareError(HashDesignError, ValueError):
    pass


class CarrierMismatchError(HashDesignError, ValueError):
    pass


class DomainMismatchError(HashDesignError, ValueError):
    pass


class NotBalancedError(HashDesignError):
    pass


# privacy
class BadSourceError(HashDesignError, ValueError):
    pass


class AlphabetMismatchError(HashDesignError, ValueError):
    pass


class ZeroMassKeyValueError(HashDesignError):
    pass


class NegativeRadicandError(HashDesignError):
    pass


class TheoremViolationError(VerificationFailure):
    def __init__(self, message: str, dump: dict | None = None):
        super().__init__(message)
        self.dump = dump or {}
