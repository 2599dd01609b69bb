"""viscoflow: staggered-grid solver and verification suite for a diffusive
conformation-tensor viscoelastic fluid model with energy-budget diagnostics."""

from .errors import (
    CFLViolation,
    IdentityViolation,
    InadmissibleInitialData,
    InvalidTestField,
    ParseError,
    PositivityLoss,
    SingularMatrix,
    SolverDivergence,
    ValidationError,
    ViscoflowError,
)

__version__ = "0.1.0"

__all__ = [
    "CFLViolation",
    "IdentityViolation",
    "InadmissibleInitialData",
    "InvalidTestField",
    "ParseError",
    "PositivityLoss",
    "SingularMatrix",
    "SolverDivergence",
    "ValidationError",
    "ViscoflowError",
    "__version__",
]
