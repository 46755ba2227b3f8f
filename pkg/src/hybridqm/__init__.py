"""Numerical toolkit for hybrid superconducting-qubit, mechanical and optical systems."""

from .errors import (
    ContractError,
    HybridQMError,
    IntegrationError,
    NearResonanceError,
    NumericalGuardError,
    ProtocolError,
    TruncationError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "ContractError",
    "HybridQMError",
    "IntegrationError",
    "NearResonanceError",
    "NumericalGuardError",
    "ProtocolError",
    "TruncationError",
    "ValidationError",
    "__version__",
]
