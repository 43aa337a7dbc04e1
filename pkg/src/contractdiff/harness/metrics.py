"""Pairwise divergence indicators, aggregation and crash refinement."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from ..vm.interpreter import ExecutionRecord, Status

CRASH_CLASS = frozenset({Status.OUT_OF_GAS, Status.STEP_LIMIT, Status.VM_ERROR, Status.BACKEND_CRASH})


class TooFewBackends(Exception):
    pass


class UndefinedIndicator(Exception):
    """An indicator involving a BackendCrash record has no defined value."""


class Classification(str, enum.Enum):
    ALL_AGREE = "AllAgree"
    OUTPUT_MISMATCH = "OutputMismatch"
    CRASH_ASYMMETRY = "CrashAsymmetry"


def norm_abs(x: int, y: int) -> float:
    return abs(x - y) / max(x, y, 1)


def _check(a: ExecutionRecord, b: ExecutionRecord, strict: bool) -> bool:
    if a.crashed or b.crashed:
        if strict:
            raise UndefinedIndicator(f"{a.backend_id or 'a'} vs {b.backend_id or 'b'}: backend crashed")
        return False
    return True


def gas_diff(a: ExecutionRecord, b: ExecutionRecord, strict: bool = False) -> float:
    """``|gas_a - gas_b| / max(gas_a, gas_b, 1)``; 1.0 when either side crashed.

    With ``strict`` the crash case raises :class:`UndefinedIndicator` instead.
    """
    if not _check(a, b, strict):
        return 1.0
    return norm_abs(a.gas_used, b.gas_used)


def op_diff(a: ExecutionRecord, b: ExecutionRecord, strict: bool = False) -> float:
    if not _check(a, b, strict):
        return 1.0
    return norm_abs(len(a.op_seq), len(b.op_seq))


@dataclass(frozen=True)
class PairDiff:
    gas_diff: float
    op_diff: float
    gas_abs: int  # raw absolute differences, for reporting only
    op_abs: int


@dataclass(frozen=True)
class DiffReport:
    backend_ids: Tuple[str, ...]
    per_pair: Dict[Tuple[int, int], PairDiff]
    aggregate_diff: float
    out_vul: bool
    classification: Classification

    @property
    def max_gas_diff(self) -> float:
        return max((p.gas_diff for p in self.per_pair.values()), default=0.0)

    @property
    def max_op_diff(self) -> float:
        return max((p.op_diff for p in self.per_pair.values()), default=0.0)

    def to_dict(self) -> dict:
        return {
            "backends": list(self.backend_ids),
            "aggregate_diff": self.aggregate_diff,
            "out_vul": self.out_vul,
            "classification": self.classification.value,
            "pairs": [
                {"i": i, "j": j, "gas_diff": p.gas_diff, "op_diff": p.op_diff, "gas_abs": p.gas_abs, "op_abs": p.op_abs}
                for (i, j), p in sorted(self.per_pair.items())
            ],
        }


def classify(records: Sequence[ExecutionRecord]) -> Tuple[bool, Classification]:
    """``(out_vul, classification)`` for one multi-backend run.

    Crash asymmetry covers both crash-vs-orderly splits and runs where every
    backend failed but in different ways (e.g. step guard vs killed).
    """
    out_vul = len({r.canonical for r in records}) > 1
    crashed = [r.status in CRASH_CLASS for r in records]
    if any(crashed) and not all(crashed):
        return out_vul, Classification.CRASH_ASYMMETRY
    if all(crashed) and len({r.status for r in records}) > 1:
        return out_vul, Classification.CRASH_ASYMMETRY
    if out_vul:
        return out_vul, Classification.OUTPUT_MISMATCH
    return out_vul, Classification.ALL_AGREE


def aggregate(records: Sequence[ExecutionRecord]) -> DiffReport:
    if len(records) < 2:
        raise TooFewBackends(f"need at least 2 records, got {len(records)}")
    pairs: Dict[Tuple[int, int], PairDiff] = {}
    for i, j in itertools.combinations(range(len(records)), 2):
        a, b = records[i], records[j]
        pairs[(i, j)] = PairDiff(
            gas_diff(a, b),
            op_diff(a, b),
            abs(a.gas_used - b.gas_used),
            abs(len(a.op_seq) - len(b.op_seq)),
        )
    total = sum(p.gas_diff + p.op_diff for p in pairs.values())
    out_vul, cls = classify(records)
    return DiffReport(tuple(r.backend_id for r in records), pairs, total, out_vul, cls)


def crash_vector(records: Sequence[ExecutionRecord]) -> Tuple[bool, ...]:
    return tuple(r.status in CRASH_CLASS for r in records)


def refine(vectors: Sequence[Sequence[bool]]) -> List[Tuple[int, int]]:
    """Per-backend ``(ind1, ind2)`` counts over crash vectors (True = crashed).

    ind1: this backend alone survived.  ind2: this backend alone crashed.
    """
    if not vectors:
        return []
    n = len(vectors[0])
    ind1 = [0] * n
    ind2 = [0] * n
    for vec in vectors:
        if len(vec) != n:
            raise ValueError("crash vectors must all cover the same backends")
        survivors = [k for k, c in enumerate(vec) if not c]
        crashers = [k for k, c in enumerate(vec) if c]
        if n > 1 and len(survivors) == 1:
            ind1[survivors[0]] += 1
        if n > 1 and len(crashers) == 1:
            ind2[crashers[0]] += 1
    return list(zip(ind1, ind2))
