"""Instruction set: an EVM subset with EVM byte values."""
from __future__ import annotations

from typing import Dict, List, Tuple

OPCODES: Dict[str, int] = {
    "STOP": 0x00,
    "ADD": 0x01,
    "MUL": 0x02,
    "SUB": 0x03,
    "DIV": 0x04,
    "MOD": 0x06,
    "LT": 0x10,
    "GT": 0x11,
    "SLT": 0x12,
    "SGT": 0x13,
    "EQ": 0x14,
    "ISZERO": 0x15,
    "AND": 0x16,
    "OR": 0x17,
    "XOR": 0x18,
    "NOT": 0x19,
    "CALLDATALOAD": 0x35,
    "CALLDATASIZE": 0x36,
    "POP": 0x50,
    "MLOAD": 0x51,
    "MSTORE": 0x52,
    "SLOAD": 0x54,
    "SSTORE": 0x55,
    "JUMP": 0x56,
    "JUMPI": 0x57,
    "JUMPDEST": 0x5B,
    "CALL": 0xF1,
    "RETURN": 0xF3,
    "REVERT": 0xFD,
    "INVALID": 0xFE,
}
for _n in range(1, 33):
    OPCODES[f"PUSH{_n}"] = 0x5F + _n
for _n in range(1, 17):
    OPCODES[f"DUP{_n}"] = 0x7F + _n
    OPCODES[f"SWAP{_n}"] = 0x8F + _n

NAMES: Dict[int, str] = {v: k for k, v in OPCODES.items()}


def push_width(byte: int) -> int:
    """Immediate size of a PUSH opcode, 0 for anything else."""
    return byte - 0x5F if 0x60 <= byte <= 0x7F else 0


def disassemble(code: bytes) -> List[Tuple[int, str, int]]:
    """List of ``(offset, name, immediate)``; unknown bytes show as ``INVALID``."""
    out = []
    pc = 0
    while pc < len(code):
        b = code[pc]
        width = push_width(b)
        imm = int.from_bytes(code[pc + 1 : pc + 1 + width].ljust(width, b"\0"), "big") if width else 0
        out.append((pc, NAMES.get(b, "INVALID"), imm))
        pc += 1 + width
    return out


def jumpdests(code: bytes) -> frozenset:
    """Offsets of JUMPDEST bytes that are not inside PUSH immediates."""
    return frozenset(pc for pc, name, _ in disassemble(code) if name == "JUMPDEST")


def assemble(program: List) -> bytes:
    """Assemble a flat list of opcode names and ``("PUSHn", value)`` pairs."""
    out = bytearray()
    for item in program:
        if isinstance(item, tuple):
            name, value = item
            width = push_width(OPCODES[name])
            out.append(OPCODES[name])
            out += value.to_bytes(width, "big")
        else:
            out.append(OPCODES[item])
    return bytes(out)
