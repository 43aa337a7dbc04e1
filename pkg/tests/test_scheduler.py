import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from contractdiff.lang import parse
from contractdiff.scheduler import EmptyPool, SeedEntry, SeedPool, admit, load_pool, prioritize, save_pool

C = parse("contract A { function f() public { } }")


def pool_of(*pairs):
    entries = tuple(SeedEntry(C, d, t, k, d, k, f"e{k}") for k, (d, t) in enumerate(pairs))
    return SeedPool(entries, record=max((d for d, _ in pairs), default=0.0), next_id=len(pairs))


def test_time_priority_can_win():
    chosen, pool = prioritize(pool_of((8, 0), (3, 6)))
    assert chosen.lineage == "e1"
    assert pool.entries[0].time_pri == 1
    assert pool.entries[1].time_pri == 0


def test_single_entry():
    chosen, pool = prioritize(pool_of((4, 2)))
    assert chosen.lineage == "e0" and pool.entries[0].time_pri == 0


def test_ties_go_to_earlier_admission():
    chosen, _ = prioritize(pool_of((5, 1), (6, 0), (4, 2)))
    assert chosen.lineage == "e0"


def test_empty_pool():
    with pytest.raises(EmptyPool):
        prioritize(SeedPool())


def test_admit_first_entry():
    pool = admit(SeedPool(), C, 346)
    assert len(pool) == 1 and pool.entries[0].diff_pri == 10 and pool.record == 346


def test_admit_guard():
    pool = admit(SeedPool(), C, 1840)
    assert admit(pool, C, 1000) is pool
    assert admit(pool, C, 1840) is pool


def test_admit_rescales_older_entries():
    pool = admit(admit(SeedPool(), C, 346), C, 1840)
    assert pool.entries[0].diff_pri == pytest.approx(10 * 346 / 1840)
    assert pool.entries[0].diff_pri == pytest.approx(1.88, abs=0.005)
    assert pool.entries[1].diff_pri == 10 and pool.record == 1840


def test_forced_admission_keeps_record_monotone():
    pool = admit(SeedPool(), C, 5.0)
    pool = admit(pool, C, 1.0, force=True)
    assert len(pool) == 2 and pool.record == 5.0
    assert pool.entries[1].diff_pri == pytest.approx(2.0)


def test_cap_evicts_lowest_priority():
    pool = SeedPool(cap=3)
    for d in (1.0, 2.0, 3.0, 4.0):
        pool = admit(pool, C, d)
    assert len(pool) == 3
    assert sorted(e.diff for e in pool.entries) == [2.0, 3.0, 4.0]


def test_persistence_round_trip(tmp_path):
    pool = admit(admit(SeedPool(), C, 1.0, lineage="x"), C, 2.0, iteration=4, lineage="x")
    _, pool = prioritize(pool)
    save_pool(pool, str(tmp_path), 4)
    loaded, it = load_pool(str(tmp_path))
    assert it == 4 and loaded == pool
    assert sorted(p.name for p in tmp_path.iterdir()) == ["manifest.json", "seed-000000.msol", "seed-000001.msol"]


def simulate(rng, n_entries, rounds):
    """Random admissions and selections; returns max wait and invariant flags."""
    pool = SeedPool()
    for k in range(n_entries):
        pool = admit(pool, C, rng.uniform(0, 100), iteration=k, force=True)
    waits = {e.seed_id: 0 for e in pool.entries}
    worst_excess = -math.inf
    records = [pool.record]
    for r in range(rounds):
        if rng.random() < 0.05:
            pool = admit(pool, C, rng.uniform(0, 150), iteration=n_entries + r)
            waits.setdefault(pool.next_id - 1, 0)
        records.append(pool.record)
        assert all(0 <= e.diff_pri <= 10 for e in pool.entries)
        chosen, pool = prioritize(pool)
        for e in pool.entries:
            waits[e.seed_id] = 0 if e.seed_id == chosen.seed_id else waits[e.seed_id] + 1
            assert e.time_pri == waits[e.seed_id]
            worst_excess = max(worst_excess, waits[e.seed_id] - (10 + len(pool)))
    return worst_excess, records


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 30))
def test_starvation_freedom_and_bounds(seed, n):
    excess, records = simulate(random.Random(seed), n, 150)
    assert excess <= 0
    assert all(a <= b for a, b in zip(records, records[1:]))
