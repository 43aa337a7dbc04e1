"""Mutator weights, the weight-ordered queue, and combination strategies."""
from __future__ import annotations

import enum
import json
import math
import os
import random
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from .mutators import ALL_MUTATORS, MutatorId

ALPHA = 0.1
EPSILON = 1e-9


class StrategyChoice(str, enum.Enum):
    ODD = "OddComb"
    EVEN = "EvenComb"
    EXTREME = "ExtremeComb"
    RANDOM = "RandomComb"
    ALL = "AllComb"

    @classmethod
    def parse(cls, text: str) -> "StrategyChoice":
        for c in cls:
            if text.lower() in (c.value.lower(), c.name.lower()):
                return c
        raise ValueError(f"unknown strategy {text!r}; expected one of {[c.value for c in cls]}")


SUB_STRATEGIES = (StrategyChoice.ODD, StrategyChoice.EVEN, StrategyChoice.EXTREME, StrategyChoice.RANDOM)


@dataclass(frozen=True)
class MutatorWeights:
    weight: Tuple[float, ...]  # index k holds the weight of mutator k + 1

    def __post_init__(self):
        if len(self.weight) != len(ALL_MUTATORS):
            raise ValueError(f"expected {len(ALL_MUTATORS)} weights, got {len(self.weight)}")
        if any(w < 0 or not math.isfinite(w) for w in self.weight):
            raise ValueError("weights must be finite and non-negative")
        if abs(math.fsum(self.weight) - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {math.fsum(self.weight)}, not 1")

    @classmethod
    def uniform(cls) -> "MutatorWeights":
        n = len(ALL_MUTATORS)
        return cls(tuple(1.0 / n for _ in range(n)))

    def __getitem__(self, m: int) -> float:
        return self.weight[MutatorId(m) - 1]

    def as_dict(self) -> Dict[int, float]:
        return {int(m): self[m] for m in ALL_MUTATORS}

    def ordered(self) -> List[MutatorId]:
        """Mutators by descending weight, ties by ascending id."""
        return sorted(ALL_MUTATORS, key=lambda m: (-self[m], int(m)))

    def save(self, path: str) -> None:
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump({str(k): v for k, v in self.as_dict().items()}, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str) -> "MutatorWeights":
        with open(path) as fh:
            raw = json.load(fh)
        return cls.from_mapping({int(k): float(v) for k, v in raw.items()})

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, float]) -> "MutatorWeights":
        missing = [int(m) for m in ALL_MUTATORS if int(m) not in mapping]
        if missing:
            raise ValueError(f"weights missing for mutators {missing}")
        return cls(tuple(float(mapping[int(m)]) for m in ALL_MUTATORS))


def update_weights(
    w: MutatorWeights,
    applied: Iterable[int],
    delta_diff: float,
    diff_after: float,
    alpha: float = ALPHA,
) -> MutatorWeights:
    """Credit the applied mutators when the iteration increased the difference.

    Each applied weight is scaled by ``1 + alpha * delta / (diff_after + eps)``
    and the table is renormalized.  A non-positive delta returns ``w`` itself.
    """
    if not delta_diff > 0:
        return w
    gain = 1.0 + alpha * delta_diff / (diff_after + EPSILON)
    credited = {MutatorId(m) for m in applied}
    raw = [x * gain if MutatorId(k + 1) in credited else x for k, x in enumerate(w.weight)]
    total = math.fsum(raw)
    new = [x / total for x in raw]
    # absorb rounding so the sum is exactly representable as 1 within 1e-12
    drift = 1.0 - math.fsum(new)
    top = max(range(len(new)), key=new.__getitem__)
    new[top] += drift
    return MutatorWeights(tuple(new))


def select_mutators(ordered: Sequence[int], choice: StrategyChoice, rng: random.Random) -> List[MutatorId]:
    choice = StrategyChoice(choice)
    ordered = [MutatorId(m) for m in ordered]
    if not ordered:
        return []
    if choice is StrategyChoice.ODD:
        return ordered[0::2]
    if choice is StrategyChoice.EVEN:
        return ordered[1::2]
    if choice is StrategyChoice.EXTREME:
        return [ordered[0]] if len(ordered) == 1 else [ordered[0], ordered[-1]]
    if choice is StrategyChoice.RANDOM:
        return [rng.choice(ordered)]
    return select_mutators(ordered, resolve_all(rng), rng)


def resolve_all(rng: random.Random) -> StrategyChoice:
    """The sub-strategy AllComb delegates to for one iteration."""
    return rng.choice(SUB_STRATEGIES)
