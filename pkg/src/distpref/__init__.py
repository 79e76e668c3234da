"""Distributional preferences over sets of students, the greedy choice rule
they induce, deferred acceptance on top of it, and executable checks for the
structural properties involved."""
from ._accel import backend_name
from .choice import (
    ChoiceRule,
    DistributionalChoice,
    check_no_justified_envy,
    check_non_wasteful,
    check_path_independence,
    check_promotes,
    check_trichotomy,
    distributional_choice,
    reveal_priorities,
)
from .core import (
    BudgetExceeded,
    CheckReport,
    Comparison,
    DistributionalPreference,
    GroundSet,
    PreferenceNotCertified,
    PriorityRanking,
    SizeMismatch,
    compare,
    members,
    to_mask,
)
from .frontier import certify, frontier, non_wasteful_sets
from .instance import load_instance, parse_instance
from .matroid import greedy_basis, partition_matroid, rank, transversal_matroid, vector_matroid
from .mechanism import Market, Matching, School, check_strategy_proofness, deferred_acceptance
from .preferences import (
    Bounds,
    DiversityIndex,
    TypeAssignment,
    additive_preference,
    dichotomous_bounds_preference,
    diversity_preference,
    matroid_rank_preference,
    pointwise_preference,
    soft_bounds_preference,
)

__version__ = "0.1.0"

__all__ = [
    "additive_preference",
    "backend_name",
    "Bounds",
    "BudgetExceeded",
    "certify",
    "check_no_justified_envy",
    "check_non_wasteful",
    "check_path_independence",
    "check_promotes",
    "check_strategy_proofness",
    "check_trichotomy",
    "CheckReport",
    "ChoiceRule",
    "compare",
    "Comparison",
    "deferred_acceptance",
    "dichotomous_bounds_preference",
    "distributional_choice",
    "DistributionalChoice",
    "DistributionalPreference",
    "diversity_preference",
    "DiversityIndex",
    "frontier",
    "greedy_basis",
    "GroundSet",
    "load_instance",
    "Market",
    "Matching",
    "matroid_rank_preference",
    "members",
    "non_wasteful_sets",
    "parse_instance",
    "partition_matroid",
    "pointwise_preference",
    "PreferenceNotCertified",
    "PriorityRanking",
    "rank",
    "reveal_priorities",
    "School",
    "SizeMismatch",
    "soft_bounds_preference",
    "to_mask",
    "transversal_matroid",
    "TypeAssignment",
    "vector_matroid",
]
