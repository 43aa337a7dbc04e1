import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from contractdiff.abi import AbiSignature, decode_call
from contractdiff.inputgen import DEFAULT_POOLS, ValuePool, gen_params
from contractdiff.lang import ast as A


def test_two_uints():
    sig = AbiSignature("f", ("uint256", "uint256"))
    pool = ValuePool({"uint256": [1, 2]})
    rng = random.Random(0)
    while True:
        values, data = gen_params(sig, rng, pool)
        if values == [1, 2]:
            break
    assert len(data) == 4 + 64
    assert data[4:36] == (1).to_bytes(32, "big") and data[36:] == (2).to_bytes(32, "big")


def test_no_params_is_selector_only():
    sig = AbiSignature("f")
    values, data = gen_params(sig, random.Random(1))
    assert values == [] and data == sig.selector and len(data) == 4


def test_uint_pool_frequencies():
    sig = AbiSignature("f", ("uint256",))
    rng = random.Random(2024)
    counts = Counter(gen_params(sig, rng)[0][0] for _ in range(10_000))
    assert set(counts) == set(DEFAULT_POOLS["uint256"])
    for c in counts.values():
        assert abs(c / 10_000 - 0.2) <= 0.02
    assert chisquare(list(counts.values())).pvalue > 0.001


def test_pool_validation():
    for tag, values in DEFAULT_POOLS.items():
        assert len(values) >= 2
    with pytest.raises(ValueError):
        ValuePool({"uint256": [1]})
    with pytest.raises(ValueError):
        ValuePool({"int256": [0, 2**255]})
    with pytest.raises(ValueError):
        ValuePool({"float": [1, 2]})
    pool = ValuePool({"bytes": ["", "00ff"], "uint": ["0x10", 3]})
    assert pool["bytes"] == (b"", b"\x00\xff") and pool["uint256"] == (16, 3)


def test_dynamic_bytes_layout():
    sig = AbiSignature("g", ("bytes", "uint256"))
    pool = ValuePool({"bytes": [b"\x01" * 33, b"\x02" * 33], "uint256": [5, 6]})
    values, data = gen_params(sig, random.Random(0), pool)
    body = data[4:]
    assert int.from_bytes(body[:32], "big") == 64  # offset of the tail
    assert int.from_bytes(body[64:96], "big") == 33  # length
    assert len(body) == 32 * 2 + 32 + 64


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(A.TYPE_TAGS), max_size=6), st.integers(0, 2**32))
def test_decode_inverse_and_pool_closure(tags, seed):
    sig = AbiSignature("h", tuple(tags))
    pool = ValuePool()
    values, data = gen_params(sig, random.Random(seed), pool)
    assert decode_call(sig, data) == values
    for tag, v in zip(tags, values):
        assert v in pool[tag]
    assert gen_params(sig, random.Random(seed), pool) == (values, data)
