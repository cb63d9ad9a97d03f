"""Solver and simulator for a two-insurer zero-sum reinsurance game.

The package computes upper and lower value functions and equilibrium Markov
reinsurance controls for the difference of two classical surplus processes
on an interval [a, b], by policy iteration on the Bellman-Isaacs
integro-differential equations, and cross-validates the results with an
exact piecewise-deterministic-Markov-process Monte Carlo engine.
"""

from ._jit import JIT_ENABLED
from .bellman import (
    ControlSet,
    Grid,
    HamiltonianResult,
    Side,
    ValueTable,
    bi_operator,
    drift,
    exit_jump_integral,
    inner_jump_integral,
    lower_hamiltonian,
    upper_hamiltonian,
)
from .errors import ConfigError, ConvergenceError, DomainError, SpecError
from .model import (
    Exponential,
    ExitKind,
    GameSpec,
    ParetoII,
    PayoffSpec,
    PremiumModel,
    PremiumPrinciple,
    RetentionKind,
    RunningKind,
    base_premium,
    claim_sample,
    net_rate,
    retention,
    rho,
    xl_control_bound,
)
from .scenarios import SCENARIO_NAMES, make_scenario
from .simulate import (
    DppCheck,
    ExitSide,
    JumpEvent,
    McEstimate,
    PathRecord,
    RngStream,
    check_dpp,
    default_t_max,
    estimate_J,
    sample_path,
)
from .solver import (
    BoundaryAction,
    BoundaryDecision,
    GapResult,
    Order,
    PolicyIterationResult,
    PolicyTable,
    SolveReport,
    boundary_rule,
    improve_max,
    improve_min,
    interior_residuals,
    policy_evaluate,
    policy_iteration,
    upper_lower_gap,
)

__version__ = "0.1.0"

__all__ = [
    "JIT_ENABLED",
    "ControlSet",
    "Grid",
    "HamiltonianResult",
    "Side",
    "ValueTable",
    "bi_operator",
    "drift",
    "exit_jump_integral",
    "inner_jump_integral",
    "lower_hamiltonian",
    "upper_hamiltonian",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "SpecError",
    "Exponential",
    "ExitKind",
    "GameSpec",
    "ParetoII",
    "PayoffSpec",
    "PremiumModel",
    "PremiumPrinciple",
    "RetentionKind",
    "RunningKind",
    "base_premium",
    "claim_sample",
    "net_rate",
    "retention",
    "rho",
    "xl_control_bound",
    "SCENARIO_NAMES",
    "make_scenario",
    "DppCheck",
    "ExitSide",
    "JumpEvent",
    "McEstimate",
    "PathRecord",
    "RngStream",
    "check_dpp",
    "default_t_max",
    "estimate_J",
    "sample_path",
    "BoundaryAction",
    "BoundaryDecision",
    "GapResult",
    "Order",
    "PolicyIterationResult",
    "PolicyTable",
    "SolveReport",
    "boundary_rule",
    "improve_max",
    "improve_min",
    "interior_residuals",
    "policy_evaluate",
    "policy_iteration",
    "upper_lower_gap",
    "__version__",
]
