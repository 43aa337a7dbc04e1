"""Whole-contract mutation: build the CAST, pick mutators, apply them in turn."""
from __future__ import annotations

import random
from typing import List, Optional, Sequence

from ..lang import ast as A
from ..lang.cast import build_cast
from .mutators import MutationOutcome, MutatorId, NoApplicableSite, apply_mutator
from .strategy import StrategyChoice, select_mutators


class NothingMutated(Exception):
    def __init__(self, selected: Sequence[int]):
        self.selected = tuple(int(m) for m in selected)
        super().__init__(f"none of the selected mutators {list(self.selected)} applied")


def apply_sequence(c: A.ContractAst, selected: Sequence[int], rng: random.Random) -> MutationOutcome:
    """Apply ``selected`` in order, skipping mutators with no site."""
    tree = c
    applied: List[MutatorId] = []
    sites = []
    for m in dict.fromkeys(MutatorId(x) for x in selected):
        try:
            out = apply_mutator(build_cast(tree), m, rng)
        except NoApplicableSite:
            continue
        tree = out.mutated
        applied.append(m)
        sites.extend(out.sites)
    if not applied:
        raise NothingMutated(selected)
    return MutationOutcome(tree, tuple(applied), tuple(sites))


def mutate_contract(
    c: A.ContractAst,
    ordered: Sequence[int],
    choice: StrategyChoice,
    rng: random.Random,
    selected: Optional[Sequence[int]] = None,
) -> MutationOutcome:
    """Mutate ``c`` under ``choice``; ``selected`` overrides the strategy's pick."""
    if selected is None:
        selected = select_mutators(ordered, choice, rng)
    return apply_sequence(c, selected, rng)
