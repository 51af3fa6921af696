"""Quasi-optimal receiver grouping for broadcast systems that combine time
sharing with two-layer hierarchical modulation."""

from .channel_sim import (
    BeamModel,
    GainStats,
    SimulationSummary,
    SkippedTrial,
    pair_probability_matrix,
    run_campaign,
    sample_receivers,
)
from .hungarian import HungarianSolution, hungarian_solve, upper_bound_efficiency
from .matching_core import (
    Assignment,
    CostMatrix,
    PermutationAssignment,
    Receiver,
    UnschedulableReceiverError,
    assignment_cost,
    brute_force_optimal_permutation,
    brute_force_optimal_symmetric,
    build_cost_matrix,
    count_strategies,
    enumerate_involutions,
    load_cost_csv,
    spectrum_efficiency,
)
from .rate_model import (
    HierRateModel,
    ModcodEntry,
    ModcodParseError,
    ModcodTable,
    PairRateKind,
    default_modcod_table,
    hier_rate,
    load_modcod_table,
    load_pair_rate_table,
    single_rate,
)
from .strategies import (
    MatchingReport,
    PerturbConfig,
    largest_diff_from_costs,
    largest_diff_matching,
    perturb,
    quasi_optimal_matching,
    time_sharing,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Assignment",
    "BeamModel",
    "CostMatrix",
    "GainStats",
    "HierRateModel",
    "HungarianSolution",
    "MatchingReport",
    "ModcodEntry",
    "ModcodParseError",
    "ModcodTable",
    "PairRateKind",
    "PermutationAssignment",
    "PerturbConfig",
    "Receiver",
    "SimulationSummary",
    "SkippedTrial",
    "UnschedulableReceiverError",
    "assignment_cost",
    "brute_force_optimal_permutation",
    "brute_force_optimal_symmetric",
    "build_cost_matrix",
    "count_strategies",
    "default_modcod_table",
    "enumerate_involutions",
    "hier_rate",
    "hungarian_solve",
    "largest_diff_from_costs",
    "largest_diff_matching",
    "load_cost_csv",
    "load_modcod_table",
    "load_pair_rate_table",
    "pair_probability_matrix",
    "perturb",
    "quasi_optimal_matching",
    "run_campaign",
    "sample_receivers",
    "single_rate",
    "spectrum_efficiency",
    "time_sharing",
    "upper_bound_efficiency",
]
