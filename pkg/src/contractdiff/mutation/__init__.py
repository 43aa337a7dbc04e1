"""Syntax-preserving contract mutation."""
from .engine import NothingMutated, apply_sequence, mutate_contract
from .mutators import ALL_MUTATORS, MutationOutcome, MutatorId, NoApplicableSite, apply_mutator
from .strategy import (
    ALPHA,
    SUB_STRATEGIES,
    MutatorWeights,
    StrategyChoice,
    resolve_all,
    select_mutators,
    update_weights,
)

__all__ = [
    "NothingMutated", "apply_sequence", "mutate_contract", "ALL_MUTATORS", "MutationOutcome",
    "MutatorId", "NoApplicableSite", "apply_mutator", "ALPHA", "SUB_STRATEGIES", "MutatorWeights",
    "StrategyChoice", "resolve_all", "select_mutators", "update_weights",
]
