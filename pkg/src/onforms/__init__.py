"""Output normal pairs: canonical forms and orthogonal-product
parameterizations."""

from .errors import (ConvergenceError, DimensionError, DomainError,
                     FormError, InvariantError, OnformsError, ParseError,
                     UnobservableError, UnstableError)
from .pair import OutputPair

__all__ = ["OutputPair", "OnformsError", "DimensionError", "DomainError",
           "UnstableError", "UnobservableError", "FormError",
           "ConvergenceError", "InvariantError", "ParseError"]
__version__ = "0.1.0"
