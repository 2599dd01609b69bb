"""Exception taxonomy shared across the package."""

from __future__ import annotations


class ViscoflowError(Exception):
    """Base class for all package-specific failures."""


class SingularMatrix(ViscoflowError):
    """A matrix function was asked for an input outside its domain
    (singular inverse, log/fractional power of a non-positive-definite
    symmetric matrix)."""


class SolverDivergence(ViscoflowError):
    """An iterative linear solve failed to reach its tolerance."""


class PositivityLoss(ViscoflowError):
    """The conformation field lost positive definiteness somewhere.

    Raised, never silently repaired: eigenvalue clamping would falsify the
    energy accounting this package exists to check.
    """


class CFLViolation(ViscoflowError):
    """Advective CFL number exceeded the hard cap for the explicit terms."""


class InadmissibleInitialData(ViscoflowError):
    """Initial conformation field is not symmetric positive definite
    (and no cutoff regularization is active to repair it)."""


class InvalidTestField(ViscoflowError):
    """A weak-form test field violates its admissibility constraints."""


class IdentityViolation(ViscoflowError):
    """An algebraic identity check exceeded its tolerance; carries the
    offending matrix for reproduction."""

    def __init__(self, message: str, matrix=None):
        super().__init__(message)
        self.matrix = matrix


class ParseError(ViscoflowError):
    """Config text could not be parsed; carries the 1-based line number."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class ValidationError(ViscoflowError):
    """A parameter value violates a documented constraint."""

    def __init__(self, key: str, constraint: str):
        super().__init__(f"{key}: {constraint}")
        self.key = key
        self.constraint = constraint
