"""Exception hierarchy shared across the package."""


class WeibullGenError(Exception):
    """Base class for all package errors."""


class DomainError(WeibullGenError, ValueError):
    """An argument lies outside the domain of a function or distribution."""


class ParameterError(WeibullGenError, ValueError):
    """Distribution parameters violate their invariants."""


class SupportError(DomainError):
    """An observation falls outside the support of the distribution."""


class DegenerateSampleError(WeibullGenError, ValueError):
    """The sample carries too little information for the requested operation."""


class ConvergenceError(WeibullGenError, RuntimeError):
    """An iterative procedure failed to reach its tolerance."""


class SingularInformationError(WeibullGenError, ArithmeticError):
    """The information matrix could not be inverted."""


class NoAdmissibleModelError(WeibullGenError):
    """Every candidate family was rejected by the goodness-of-fit test."""


class InputError(WeibullGenError, ValueError):
    """Malformed user input (files, records, identifiers)."""
