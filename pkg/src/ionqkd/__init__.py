"""Key-rate analysis, optimization, and Monte Carlo simulation for
trapped-ion quantum repeater chains."""

from .core import (
    ArchitectureMismatchError,
    ArchitectureSpec,
    BellDiagonalState,
    ChainGeometry,
    Conventions,
    DEFAULT_CONVENTIONS,
    RepeaterParams,
    Variant,
    chain_qber,
    effective_station_error,
    initial_bell_state,
    link_success_prob,
    swap_transfer_channel,
)
from .optimize import (
    Objective,
    OptimizationResult,
    SweepAxis,
    SweepPoint,
    crossover_distance,
    min_viable_spacing,
    optimize_neg,
    optimize_spacing,
    rsec_per_qubit,
    sweep,
)
from .rates import (
    RateReport,
    binary_entropy,
    chain_success_prob,
    cycle_time,
    evaluate_point,
    plob_rate,
    prob_links,
    raw_rate_type1,
    raw_rate_type2,
    rci,
    secret_key_rate,
)
from .simulate import (
    SimConfig,
    SimEstimate,
    analytic_reference,
    simulate_chain,
    simulate_link_attempts,
)

__version__ = "0.1.0"

__all__ = [
    "ArchitectureMismatchError",
    "ArchitectureSpec",
    "BellDiagonalState",
    "ChainGeometry",
    "Conventions",
    "DEFAULT_CONVENTIONS",
    "Objective",
    "OptimizationResult",
    "RateReport",
    "RepeaterParams",
    "SimConfig",
    "SimEstimate",
    "SweepAxis",
    "SweepPoint",
    "Variant",
    "analytic_reference",
    "binary_entropy",
    "chain_qber",
    "chain_success_prob",
    "crossover_distance",
    "cycle_time",
    "effective_station_error",
    "evaluate_point",
    "initial_bell_state",
    "link_success_prob",
    "min_viable_spacing",
    "optimize_neg",
    "optimize_spacing",
    "plob_rate",
    "prob_links",
    "raw_rate_type1",
    "raw_rate_type2",
    "rci",
    "rsec_per_qubit",
    "secret_key_rate",
    "simulate_chain",
    "simulate_link_attempts",
    "swap_transfer_channel",
    "sweep",
]
