"""Equivalent star and chain realizations of solute-transport networks.

Build a normalized state-space realization from a compartment network,
verify its structural properties, construct provably equivalent multi-rate
mass transfer (star) and multiple-interacting-continua (chain) forms,
reduce models exactly or by truncation, and simulate tracer dynamics.
"""

from .errors import (
    DisconnectedGraphError,
    EmptyModelError,
    InconsistentSymmetryError,
    LanczosBreakdown,
    ModelError,
    NonNegativityViolatedError,
    NonPositiveParameterError,
    NoConvergenceError,
    NotControllableError,
    NotPositiveDefiniteError,
    NotSymmetricError,
    NumericallyDegenerateError,
    PoleOnAxisError,
    PositivityViolationError,
    SingularMatrixError,
    SpecFormatError,
)
from .network import (
    NetworkSpec,
    StateSpace,
    ValidationReport,
    VMDecomposition,
    build_state_space,
    check_assumptions,
    extract_physical_parameters,
    load_network_spec,
    parse_network_spec,
    recover_volumes,
)
from .realization import (
    MinimalityReport,
    TransferFunction,
    controllability_matrix,
    frequency_response,
    is_minimal,
    markov_parameters,
    observability_matrix,
    transfer_function,
)
from .reduction import ReductionReport, minimal_mrmt, truncate
from .sim import PiecewiseConstant, SimulationResult, breakthrough_curve, simulate
from .transforms import (
    EquivalenceReport,
    EquivalentRealization,
    to_minc,
    to_mrmt,
    verify_equivalence,
)

__version__ = "0.1.0"

__all__ = [
    "DisconnectedGraphError",
    "EmptyModelError",
    "EquivalenceReport",
    "EquivalentRealization",
    "InconsistentSymmetryError",
    "LanczosBreakdown",
    "MinimalityReport",
    "ModelError",
    "NetworkSpec",
    "NoConvergenceError",
    "NonNegativityViolatedError",
    "NonPositiveParameterError",
    "NotControllableError",
    "NotPositiveDefiniteError",
    "NotSymmetricError",
    "NumericallyDegenerateError",
    "PiecewiseConstant",
    "PoleOnAxisError",
    "PositivityViolationError",
    "ReductionReport",
    "SimulationResult",
    "SingularMatrixError",
    "SpecFormatError",
    "StateSpace",
    "TransferFunction",
    "VMDecomposition",
    "ValidationReport",
    "breakthrough_curve",
    "build_state_space",
    "check_assumptions",
    "controllability_matrix",
    "extract_physical_parameters",
    "frequency_response",
    "is_minimal",
    "load_network_spec",
    "markov_parameters",
    "minimal_mrmt",
    "observability_matrix",
    "parse_network_spec",
    "recover_volumes",
    "simulate",
    "to_minc",
    "to_mrmt",
    "transfer_function",
    "truncate",
    "verify_equivalence",
]
