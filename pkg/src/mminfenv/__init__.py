"""Moments of an M/M/inf queue modulated by a semi-Markov environment.

The package computes factorial and raw moments of the stationary number
of customers exactly, via matrix recursions in the moment order, checks
them against built-in structural identities and two-state closed forms,
and estimates them independently with a discrete-event simulation.
"""

from .distributions import (
    Deterministic,
    Exponential,
    Gamma,
    HyperExponential,
    SojournDistribution,
    TabulatedLaplace,
)
from .environment import (
    ChainStatics,
    EnvironmentModel,
    chain_statics,
    mean_cycle_length,
    require_valid,
    validate_model,
)
from .errors import EstimationError, ModelError, NumericError
from .closedform import TwoStateModel, kummer_reference
from .modelfile import load_model, model_to_dict, parse_model
from .moments import (
    MomentTable,
    PalmMoments,
    assemble_moment_table,
    compute_moment_table,
    forward_relation_residuals,
    markovian_identity_residuals,
    offered_loads,
    palm_moment_vectors,
    recursion_matrix,
    stationary_moment_vectors,
)
from .sim import (
    EnvironmentPath,
    SimulationConfig,
    SimulationEstimate,
    default_warmup,
    estimate_factorial_moments,
    simulate_environment,
    simulate_queue,
    stationarity_check,
)
from .stirling import StirlingTables

__version__ = "0.1.0"

__all__ = [
    "ChainStatics",
    "Deterministic",
    "EnvironmentModel",
    "EnvironmentPath",
    "EstimationError",
    "Exponential",
    "Gamma",
    "HyperExponential",
    "ModelError",
    "MomentTable",
    "NumericError",
    "PalmMoments",
    "SimulationConfig",
    "SimulationEstimate",
    "SojournDistribution",
    "StirlingTables",
    "TabulatedLaplace",
    "TwoStateModel",
    "assemble_moment_table",
    "chain_statics",
    "compute_moment_table",
    "default_warmup",
    "estimate_factorial_moments",
    "forward_relation_residuals",
    "kummer_reference",
    "load_model",
    "markovian_identity_residuals",
    "mean_cycle_length",
    "model_to_dict",
    "offered_loads",
    "palm_moment_vectors",
    "parse_model",
    "recursion_matrix",
    "require_valid",
    "simulate_environment",
    "simulate_queue",
    "stationarity_check",
    "stationary_moment_vectors",
    "validate_model",
    "__version__",
]
