"""Calldata generation from typed pools of common and boundary values."""
from __future__ import annotations

import random
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .abi import AbiSignature, Value, decode_call, encode_call
from .lang import ast as A

__all__ = ["AbiSignature", "ValuePool", "DEFAULT_POOLS", "gen_params", "decode_call", "coerce_value"]

DEFAULT_POOLS: Dict[str, Tuple[Value, ...]] = {
    A.UINT256: (0, 1, 2, 2**255, 2**256 - 1),
    A.INT256: (0, 1, -1, A.INT_MIN, A.INT_MAX),
    A.BOOL: (True, False),
    A.ADDRESS: (0, A.ADDRESS_MAX),
    A.BYTES32: (0, 2**256 - 1),
    A.BYTES: (b"", bytes(range(32)), bytes(i % 251 for i in range(1024))),
}


def _in_range(tag: str, value: Value) -> bool:
    if tag == A.BYTES:
        return isinstance(value, (bytes, bytearray))
    if tag == A.BOOL:
        return isinstance(value, bool)
    if isinstance(value, (bytes, bytearray, bool)):
        return False
    return A.literal_fits(tag, value)


class ValuePool:
    """Candidate values per type tag; overrides replace a tag's list wholesale."""

    def __init__(self, overrides: Optional[Mapping[str, Sequence[Value]]] = None):
        pools = {tag: tuple(values) for tag, values in DEFAULT_POOLS.items()}
        for tag, values in (overrides or {}).items():
            tag = A.TYPE_ALIASES.get(tag, tag)
            if tag not in A.TYPE_TAGS:
                raise ValueError(f"unknown type tag {tag!r}")
            pools[tag] = tuple(coerce_value(tag, v) for v in values)
        for tag, values in pools.items():
            if len(values) < 2:
                raise ValueError(f"pool for {tag} needs at least 2 values")
            bad = [v for v in values if not _in_range(tag, v)]
            if bad:
                raise ValueError(f"pool for {tag} has out-of-range values {bad}")
        self.pools = pools

    def __getitem__(self, tag: str) -> Tuple[Value, ...]:
        return self.pools[tag]

    def to_json(self) -> Dict[str, List]:
        return {
            tag: [v.hex() if isinstance(v, (bytes, bytearray)) else v for v in values]
            for tag, values in self.pools.items()
        }


def coerce_value(tag: str, v) -> Value:
    # JSON config carries bytes as hex strings and big ints as strings
    if tag == A.BYTES and isinstance(v, str):
        return bytes.fromhex(v)
    if tag != A.BYTES and tag != A.BOOL and isinstance(v, str):
        return int(v, 0)
    return v


def gen_params(
    sig: AbiSignature, rng: random.Random, pool: Optional[ValuePool] = None
) -> Tuple[List[Value], bytes]:
    """Draw one value per parameter uniformly from its pool and encode the call."""
    pool = pool or ValuePool()
    values = [rng.choice(pool[tag]) for tag in sig.params]
    return values, encode_call(sig, values)
