"""Function signatures, selectors and calldata encoding."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

from .lang import ast as A

Value = Union[int, bool, bytes]


@dataclass(frozen=True)
class AbiSignature:
    name: str
    params: Tuple[str, ...] = ()

    @property
    def canonical(self) -> str:
        return f"{self.name}({','.join(self.params)})"

    @property
    def selector(self) -> bytes:
        # sha256 rather than keccak: only compiler and encoder need to agree
        return hashlib.sha256(self.canonical.encode()).digest()[:4]

    @classmethod
    def of(cls, fn: A.FunctionDecl) -> "AbiSignature":
        return cls(fn.name, tuple(p.type for p in fn.params))

    @classmethod
    def parse(cls, text: str) -> "AbiSignature":
        name, _, rest = text.partition("(")
        inner = rest.rstrip(")")
        return cls(name, tuple(t for t in inner.split(",") if t))


def _word(tag: str, value: Value) -> bytes:
    if tag == A.BOOL:
        return int(bool(value)).to_bytes(32, "big")
    if tag == A.INT256:
        return (int(value) % 2**256).to_bytes(32, "big")
    return int(value).to_bytes(32, "big")


def encode_args(types: Sequence[str], values: Sequence[Value]) -> bytes:
    """Head/tail encoding: 32-byte slots, ``bytes`` as offset + length + padded data."""
    if len(types) != len(values):
        raise ValueError("types and values differ in length")
    head: List[bytes] = []
    tail = bytearray()
    head_size = 32 * len(types)
    for tag, value in zip(types, values):
        if tag == A.BYTES:
            data = bytes(value)
            head.append((head_size + len(tail)).to_bytes(32, "big"))
            tail += len(data).to_bytes(32, "big")
            tail += data + b"\0" * (-len(data) % 32)
        else:
            head.append(_word(tag, value))
    return b"".join(head) + bytes(tail)


def encode_call(sig: AbiSignature, values: Sequence[Value]) -> bytes:
    return sig.selector + encode_args(sig.params, values)


def decode_call(sig: AbiSignature, calldata: bytes) -> List[Value]:
    if calldata[:4] != sig.selector:
        raise ValueError("selector mismatch")
    args = calldata[4:]
    out: List[Value] = []
    for i, tag in enumerate(sig.params):
        word = int.from_bytes(args[32 * i : 32 * i + 32], "big")
        if tag == A.BYTES:
            length = int.from_bytes(args[word : word + 32], "big")
            out.append(bytes(args[word + 32 : word + 32 + length]))
        elif tag == A.BOOL:
            out.append(bool(word))
        elif tag == A.INT256:
            out.append(word - 2**256 if word >= 2**255 else word)
        else:
            out.append(word)
    return out
