"""Exception types raised across the package.

Every error carries an ``exit_code`` so the CLI can map failures onto its
documented exit statuses: 1 file/parse trouble, 2 not controllable,
3 violated network assumptions, 4 numerical failure.
"""

from __future__ import annotations

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_NOT_CONTROLLABLE = 2
EXIT_ASSUMPTIONS = 3
EXIT_NUMERICAL = 4


class ModelError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = EXIT_NUMERICAL

    def payload(self) -> dict:
        """Extra machine-readable fields for the CLI error report."""
        return {}


class SpecFormatError(ModelError):
    """A model file or dictionary does not match the documented schema."""

    exit_code = EXIT_PARSE


class NonPositiveParameterError(ModelError):
    """A volume, exchange rate, or flow is zero or negative."""

    exit_code = EXIT_ASSUMPTIONS


class DisconnectedGraphError(ModelError):
    """The exchange graph does not connect every compartment to the mobile zone."""

    exit_code = EXIT_ASSUMPTIONS

    def __init__(self, unreachable: list[int]):
        self.unreachable = sorted(unreachable)
        names = ", ".join(str(i) for i in self.unreachable)
        super().__init__(f"compartments unreachable from the mobile zone: {names}")

    def payload(self) -> dict:
        return {"unreachable": self.unreachable}


class AssumptionViolationError(ModelError):
    """A matrix fails the structural requirements of a conservative network."""

    exit_code = EXIT_ASSUMPTIONS


class InconsistentSymmetryError(ModelError):
    """No volume assignment makes the weighted system matrix symmetric."""

    exit_code = EXIT_ASSUMPTIONS


class NotSymmetricError(ModelError):
    """A symmetric-matrix kernel received a non-symmetric input."""


class NoConvergenceError(ModelError):
    """An iterative kernel exhausted its sweep budget."""


class LanczosBreakdown(ModelError):
    """The tridiagonalization recurrence produced a (near-)zero residual.

    Signals that the Krylov space of the input pair has deficient dimension,
    i.e. the underlying realization is not minimal.
    """

    def __init__(self, step: int, residual_norm: float):
        self.step = step
        self.residual_norm = residual_norm
        super().__init__(
            f"breakdown at step {step}: residual norm {residual_norm:.3e}"
        )

    def payload(self) -> dict:
        return {"step": self.step, "residual_norm": self.residual_norm}


class NotPositiveDefiniteError(ModelError):
    """A Cholesky pivot was not strictly positive."""

    def __init__(self, pivot_index: int, pivot_value: float):
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value
        super().__init__(
            f"pivot {pivot_index} is {pivot_value:.3e}; matrix is not positive definite"
        )

    def payload(self) -> dict:
        return {"pivot_index": self.pivot_index, "pivot_value": self.pivot_value}


class SingularMatrixError(ModelError):
    """A linear solve met a pivot below the singularity threshold."""


class NotControllableError(ModelError):
    """The realization is not controllable, so no equivalent star form exists."""

    exit_code = EXIT_NOT_CONTROLLABLE

    def __init__(self, message: str, rank: int, dimension: int,
                 singular_values: tuple[float, ...] = ()):
        self.rank = rank
        self.dimension = dimension
        self.singular_values = tuple(float(s) for s in singular_values)
        super().__init__(message)

    def payload(self) -> dict:
        return {
            "rank": self.rank,
            "dimension": self.dimension,
            "singular_values": list(self.singular_values),
        }


class NumericallyDegenerateError(ModelError):
    """Two exchange-rate eigenvalues are too close to separate reliably."""


class PositivityViolationError(ModelError):
    """A quantity that is positive in exact arithmetic came out non-positive."""


class PoleOnAxisError(ModelError):
    """A transfer function has a pole on (or too near) the imaginary axis."""


class EmptyModelError(ModelError):
    """A truncation criterion removed every immobile zone."""


class NonNegativityViolatedError(ModelError):
    """A simulated state left the non-negative cone beyond round-off."""
