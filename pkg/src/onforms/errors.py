"""Exception types shared across the package.

The CLI maps each class onto an exit code, so every failure a user can
trigger should surface as one of these.
"""


class OnformsError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class DimensionError(OnformsError, ValueError):
    """Matrix shapes or indices are inconsistent."""

    exit_code = 2


class DomainError(OnformsError, ValueError):
    """Input lies outside the domain an operation is defined on."""

    exit_code = 3


class UnstableError(DomainError):
    """Spectral radius is not below the stability threshold."""


class UnobservableError(DomainError):
    """Observability Grammian is numerically singular."""


class FormError(DomainError):
    """Pair is not in the canonical form an operation requires."""


class ConvergenceError(OnformsError, ArithmeticError):
    """An iterative kernel failed to converge or a swap was rejected."""

    exit_code = 4


class InvariantError(OnformsError, AssertionError):
    """A checked invariant failed beyond tolerance."""

    exit_code = 5


class ParseError(OnformsError, ValueError):
    """A model or parameter file is malformed."""

    exit_code = 2
