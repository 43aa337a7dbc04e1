"""Seed pool with diff priority plus waiting-time priority."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from typing import List, Tuple

from .lang import ast as A
from .lang.emit import emit_source

MAX_PRI = 10.0
DEFAULT_POOL_CAP = 4096


class EmptyPool(Exception):
    pass


@dataclass(frozen=True)
class SeedEntry:
    contract: A.ContractAst
    diff_pri: float
    time_pri: int
    admitted_at: int
    diff: float  # aggregate diff when admitted; diff_pri is derived from it
    seed_id: int = 0
    lineage: str = ""

    @property
    def priority(self) -> float:
        return self.diff_pri + self.time_pri


@dataclass(frozen=True)
class SeedPool:
    entries: Tuple[SeedEntry, ...] = ()
    record: float = 0.0
    cap: int = DEFAULT_POOL_CAP
    next_id: int = field(default=0, compare=False)

    def __len__(self) -> int:
        return len(self.entries)


def prioritize(pool: SeedPool) -> Tuple[SeedEntry, SeedPool]:
    """Choose the entry with the highest ``diff_pri + time_pri``.

    Ties go to the earlier admission.  Everyone else waits one more round.
    """
    if not pool.entries:
        raise EmptyPool("seed pool is empty")
    best = min(range(len(pool.entries)), key=lambda k: (-pool.entries[k].priority, pool.entries[k].admitted_at, k))
    updated = []
    for k, e in enumerate(pool.entries):
        updated.append(replace(e, time_pri=0) if k == best else replace(e, time_pri=e.time_pri + 1))
    return updated[best], replace(pool, entries=tuple(updated))


def _scaled(diff: float, record: float) -> float:
    if record <= 0:
        return MAX_PRI
    return min(MAX_PRI, max(0.0, MAX_PRI * diff / record))


def admit(
    pool: SeedPool,
    c: A.ContractAst,
    diff: float,
    iteration: int = 0,
    lineage: str = "",
    force: bool = False,
) -> SeedPool:
    """Add ``c`` if ``diff`` beats the record, rescaling older priorities.

    ``force`` admits regardless (used for the initial corpus); the record
    still only moves upward.
    """
    if diff < 0:
        raise ValueError("diff must be non-negative")
    if not force and not diff > pool.record:
        return pool
    record = max(pool.record, diff)
    entries = [replace(e, diff_pri=_scaled(e.diff, record)) for e in pool.entries]
    entries.append(SeedEntry(c, _scaled(diff, record), 0, iteration, diff, pool.next_id, lineage))
    if len(entries) > pool.cap:
        # drop the weakest; among equals the most recently admitted goes first
        victim = min(range(len(entries)), key=lambda k: (entries[k].diff_pri, -entries[k].admitted_at, -k))
        del entries[victim]
    return replace(pool, entries=tuple(entries), record=record, next_id=pool.next_id + 1)


# -- persistence -------------------------------------------------------------

MANIFEST = "manifest.json"


def save_pool(pool: SeedPool, directory: str, iteration: int) -> None:
    """One source file per seed plus a manifest of priorities."""
    os.makedirs(directory, exist_ok=True)
    rows = []
    keep = set()
    for e in pool.entries:
        name = f"seed-{e.seed_id:06d}.msol"
        keep.add(name)
        path = os.path.join(directory, name)
        if not os.path.exists(path):
            with open(path, "w") as fh:
                fh.write(emit_source(e.contract))
        rows.append({
            "file": name,
            "seed_id": e.seed_id,
            "lineage": e.lineage,
            "diff": e.diff,
            "diff_pri": e.diff_pri,
            "time_pri": e.time_pri,
            "admitted_at": e.admitted_at,
        })
    for stale in os.listdir(directory):
        if stale.startswith("seed-") and stale.endswith(".msol") and stale not in keep:
            os.remove(os.path.join(directory, stale))
    manifest = {"iteration": iteration, "record": pool.record, "cap": pool.cap, "next_id": pool.next_id, "entries": rows}
    tmp = os.path.join(directory, MANIFEST + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, os.path.join(directory, MANIFEST))


def load_pool(directory: str) -> Tuple[SeedPool, int]:
    """Inverse of :func:`save_pool`; returns the pool and its iteration."""
    from .lang.parser import parse

    with open(os.path.join(directory, MANIFEST)) as fh:
        manifest = json.load(fh)
    entries: List[SeedEntry] = []
    for row in manifest["entries"]:
        with open(os.path.join(directory, row["file"])) as fh:
            tree = parse(fh.read())
        entries.append(SeedEntry(
            tree, row["diff_pri"], row["time_pri"], row["admitted_at"], row["diff"], row["seed_id"], row["lineage"],
        ))
    pool = SeedPool(tuple(entries), manifest["record"], manifest["cap"], manifest["next_id"])
    return pool, manifest["iteration"]

