"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` (bad input, caught
before any numerics run) and :class:`NumericalGuardError` (a numerical
assumption such as truncation or dispersive validity was violated).
The CLI maps them to exit codes 2 and 3.
"""


class HybridQMError(Exception):
    """Base class for all package errors."""


class ValidationError(HybridQMError, ValueError):
    """Input rejected before computation (bad dimension, negative rate, missing field)."""


class InvalidDimensionError(ValidationError):
    pass


class ContractError(ValidationError):
    """A documented precondition on an argument does not hold (e.g. non-Hermitian input)."""


class UnsupportedBasisError(ValidationError):
    pass


class NumericalGuardError(HybridQMError, ArithmeticError):
    """A numerical validity guard tripped during computation."""


class TruncationError(NumericalGuardError):
    pass


class NearResonanceError(NumericalGuardError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class DegenerateJunctionError(NumericalGuardError):
    pass


class IntegrationError(NumericalGuardError):
    """Step-size instability or failure to reach a steady state."""


class ProtocolError(NumericalGuardError):
    """A protocol plan is physically inconsistent (e.g. an unclosed phase-space loop)."""
