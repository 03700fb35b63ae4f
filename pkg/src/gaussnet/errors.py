"""Exception hierarchy.

``ParameterError`` covers invalid arguments and misaligned inputs. Everything
under ``NumericalDegeneracyError`` signals that the inputs were well-formed but
the computation hit a degenerate case (zero vectors, non-finite iterates).
"""


class ParameterError(ValueError):
    """Invalid argument value, shape or dimension."""


class ContractViolationError(ValueError):
    """A user-supplied callable broke its documented contract."""


class NumericalDegeneracyError(ArithmeticError):
    """Base class for degenerate numerical events."""


class DegenerateInputError(NumericalDegeneracyError):
    """Input carries no usable information (e.g. a single-point cloud)."""


class DegenerateOutputError(NumericalDegeneracyError):
    """A layer produced an output that cannot be renormalized."""

    def __init__(self, message, *, layer=None, index=None):
        super().__init__(message)
        self.layer = layer
        self.index = index


class DegenerateObservationError(NumericalDegeneracyError):
    """An observation q carries no direction information."""


class NumericalFailureError(NumericalDegeneracyError):
    """Non-finite values appeared during an iterative computation."""
