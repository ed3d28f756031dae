"""Continuous-time quantum walks on a 1D chain with time-alternating transition defects."""

from ctqw.errors import (
    BoundaryContamination,
    ConfigError,
    ConvergenceFailure,
    CtqwError,
    NumericalError,
)
from ctqw.lattice import HamiltonianOperator, LatticeSpec, apply, build_hamiltonian, required_sites
from ctqw.observables import (
    ObservableRecord,
    ObservableSeries,
    inverse_participation_ratio,
    probability_distribution,
    relative_quadratic_deviation,
    shannon_entropy,
    standard_deviation,
)
from ctqw.propagator import (
    DefectProtocol,
    PropagatorConfig,
    WalkerState,
    evolve_protocol,
    evolve_static,
    localized_state,
    oracle_evolve,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryContamination",
    "ConfigError",
    "ConvergenceFailure",
    "CtqwError",
    "DefectProtocol",
    "HamiltonianOperator",
    "LatticeSpec",
    "NumericalError",
    "ObservableRecord",
    "ObservableSeries",
    "PropagatorConfig",
    "WalkerState",
    "apply",
    "build_hamiltonian",
    "evolve_protocol",
    "evolve_static",
    "inverse_participation_ratio",
    "localized_state",
    "oracle_evolve",
    "probability_distribution",
    "relative_quadratic_deviation",
    "required_sites",
    "shannon_entropy",
    "standard_deviation",
]
