"""Stack-machine interpreter with gas metering, tracing and a step limit."""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from .gas import REFERENCE, GasSchedule
from .opcodes import NAMES, OPCODES, jumpdests

WORD = 2**256
MASK = WORD - 1
SIGN = 2**255
MAX_STACK = 1024
MEMORY_LIMIT = 1 << 20
DEADLINE_CHECK_EVERY = 4096

DEFAULT_STEP_LIMIT = 1_000_000
DEFAULT_GAS_LIMIT = 10_000_000


class Status(str, enum.Enum):
    SUCCESS = "Success"
    REVERT = "Revert"
    OUT_OF_GAS = "OutOfGas"
    STEP_LIMIT = "StepLimitExceeded"
    VM_ERROR = "VmError"
    BACKEND_CRASH = "BackendCrash"

    @property
    def orderly(self) -> bool:
        return self in (Status.SUCCESS, Status.REVERT)


@dataclass(frozen=True)
class ExecutionRecord:
    backend_id: str
    status: Status
    output: bytes = b""
    gas_used: int = 0
    op_seq: Tuple[str, ...] = ()
    error: Optional[str] = None  # VmError kind or crash detail
    refund: int = 0
    wall_time: float = field(default=0.0, compare=False)

    @property
    def crashed(self) -> bool:
        return self.status is Status.BACKEND_CRASH

    @property
    def canonical(self) -> Tuple[str, Optional[str], bytes]:
        """What two backends must agree on for their outputs to match."""
        return (self.status.value, self.error if self.status is Status.VM_ERROR else None, self.output)

    def to_dict(self) -> dict:
        return {
            "backend_id": self.backend_id,
            "status": self.status.value,
            "error": self.error,
            "output": self.output.hex(),
            "gas_used": self.gas_used,
            "refund": self.refund,
            "op_seq": list(self.op_seq),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExecutionRecord":
        return cls(
            d["backend_id"],
            Status(d["status"]),
            bytes.fromhex(d.get("output", "")),
            int(d.get("gas_used", 0)),
            tuple(d.get("op_seq", ())),
            d.get("error"),
            int(d.get("refund", 0)),
        )


@dataclass(frozen=True)
class VmConfig:
    schedule: GasSchedule = REFERENCE
    trace_optimization: str = "none"  # or "fused"
    step_limit: int = DEFAULT_STEP_LIMIT
    gas_limit: int = DEFAULT_GAS_LIMIT
    step_guard: bool = True  # False: run until gas, halt or the harness deadline

    def __post_init__(self):
        if self.step_limit < 1 or self.gas_limit < 1:
            raise ValueError("step_limit and gas_limit must be >= 1")
        if self.trace_optimization not in ("none", "fused"):
            raise ValueError(f"unknown trace optimization {self.trace_optimization!r}")

    def with_limits(self, gas_limit=None, step_limit=None) -> "VmConfig":
        return replace(
            self,
            gas_limit=gas_limit or self.gas_limit,
            step_limit=step_limit or self.step_limit,
        )


class WallLimitExceeded(Exception):
    """Raised out of :func:`execute` when a caller-supplied deadline passes."""


class _Halt(Exception):
    def __init__(self, status: Status, error: Optional[str] = None):
        self.status, self.error = status, error


_POP = OPCODES["POP"]


def _signed(x: int) -> int:
    return x - WORD if x & SIGN else x


def execute(
    code: bytes,
    calldata: bytes,
    cfg: VmConfig = VmConfig(),
    backend_id: str = "",
    deadline: Optional[float] = None,
) -> ExecutionRecord:
    """Run ``code`` against ``calldata``.

    All outcomes are encoded in the record's status.  ``deadline`` is a
    ``time.monotonic()`` value; passing it raises :class:`WallLimitExceeded`.
    """
    started = time.perf_counter()
    costs = cfg.schedule.by_byte()
    valid_dests = jumpdests(code)
    fused = cfg.trace_optimization == "fused"
    step_limit = cfg.step_limit if cfg.step_guard else None
    gas_limit = cfg.gas_limit
    clear_refund = cfg.schedule.refund("SSTORE_CLEAR")

    stack: list = []
    memory = bytearray()
    storage: dict = {}
    trace: list = []
    gas = 0
    refund = 0
    steps = 0
    pc = 0
    prev_push = False
    output = b""
    status = Status.SUCCESS
    error = None
    n = len(code)

    def pop():
        if not stack:
            raise _Halt(Status.VM_ERROR, "stack-underflow")
        return stack.pop()

    def push(v):
        if len(stack) >= MAX_STACK:
            raise _Halt(Status.VM_ERROR, "stack-overflow")
        stack.append(v)

    def mem_extend(offset, size):
        end = offset + size
        if end > MEMORY_LIMIT:
            raise _Halt(Status.VM_ERROR, "memory-limit")
        if end > len(memory):
            memory.extend(b"\0" * (end - len(memory)))

    try:
        while pc < n:
            if step_limit is not None and steps >= step_limit:
                raise _Halt(Status.STEP_LIMIT)
            if deadline is not None and steps % DEADLINE_CHECK_EVERY == 0 and time.monotonic() > deadline:
                raise WallLimitExceeded()
            op = code[pc]
            cost = costs[op]
            if gas + cost > gas_limit:
                raise _Halt(Status.OUT_OF_GAS)
            gas += cost
            steps += 1
            name = NAMES.get(op, "INVALID")
            if fused and op == _POP and prev_push:
                trace.pop()
            else:
                trace.append(name)
            prev_push = 0x60 <= op <= 0x7F
            pc += 1

            if prev_push:
                width = op - 0x5F
                push(int.from_bytes(code[pc : pc + width].ljust(width, b"\0"), "big"))
                pc += width
            elif 0x80 <= op <= 0x8F:
                depth = op - 0x7F
                if len(stack) < depth:
                    raise _Halt(Status.VM_ERROR, "stack-underflow")
                push(stack[-depth])
            elif 0x90 <= op <= 0x9F:
                depth = op - 0x8F
                if len(stack) <= depth:
                    raise _Halt(Status.VM_ERROR, "stack-underflow")
                stack[-1], stack[-1 - depth] = stack[-1 - depth], stack[-1]
            elif op == 0x01:
                a, b = pop(), pop()
                push((a + b) & MASK)
            elif op == 0x03:
                a, b = pop(), pop()
                push((a - b) & MASK)
            elif op == 0x02:
                a, b = pop(), pop()
                push((a * b) & MASK)
            elif op == 0x04:
                a, b = pop(), pop()
                push(a // b if b else 0)
            elif op == 0x06:
                a, b = pop(), pop()
                push(a % b if b else 0)
            elif op == 0x10:
                a, b = pop(), pop()
                push(int(a < b))
            elif op == 0x11:
                a, b = pop(), pop()
                push(int(a > b))
            elif op == 0x12:
                a, b = pop(), pop()
                push(int(_signed(a) < _signed(b)))
            elif op == 0x13:
                a, b = pop(), pop()
                push(int(_signed(a) > _signed(b)))
            elif op == 0x14:
                a, b = pop(), pop()
                push(int(a == b))
            elif op == 0x15:
                push(int(pop() == 0))
            elif op == 0x16:
                a, b = pop(), pop()
                push(a & b)
            elif op == 0x17:
                a, b = pop(), pop()
                push(a | b)
            elif op == 0x18:
                a, b = pop(), pop()
                push(a ^ b)
            elif op == 0x19:
                push(pop() ^ MASK)
            elif op == 0x35:
                off = pop()
                chunk = calldata[off : off + 32] if off < len(calldata) else b""
                push(int.from_bytes(chunk.ljust(32, b"\0"), "big"))
            elif op == 0x36:
                push(len(calldata))
            elif op == 0x50:
                pop()
            elif op == 0x51:
                off = pop()
                mem_extend(off, 32)
                push(int.from_bytes(memory[off : off + 32], "big"))
            elif op == 0x52:
                off, val = pop(), pop()
                mem_extend(off, 32)
                memory[off : off + 32] = val.to_bytes(32, "big")
            elif op == 0x54:
                push(storage.get(pop(), 0))
            elif op == 0x55:
                key, val = pop(), pop()
                if val == 0 and storage.get(key, 0) != 0:
                    refund += clear_refund
                storage[key] = val
            elif op == 0x56:
                dest = pop()
                if dest not in valid_dests:
                    raise _Halt(Status.VM_ERROR, "bad-jump-destination")
                pc = dest
            elif op == 0x57:
                dest, cond = pop(), pop()
                if cond:
                    if dest not in valid_dests:
                        raise _Halt(Status.VM_ERROR, "bad-jump-destination")
                    pc = dest
            elif op == 0x5B:
                pass
            elif op == 0xF1:
                pop()  # target
                pop()  # value
                push(1)  # stubbed: every message call succeeds
            elif op == 0xF3 or op == 0xFD:
                off, size = pop(), pop()
                if size:
                    mem_extend(off, size)
                output = bytes(memory[off : off + size]) if size else b""
                if op == 0xFD:
                    raise _Halt(Status.REVERT)
                break
            elif op == 0x00:
                break
            elif op == 0xFE:
                raise _Halt(Status.VM_ERROR, "invalid-instruction")
            else:
                raise _Halt(Status.VM_ERROR, "undefined-opcode")
    except _Halt as halt:
        status, error = halt.status, halt.error

    applied = 0
    if status is Status.SUCCESS and refund:
        applied = min(refund, gas // cfg.schedule.refund_cap_divisor)
    return ExecutionRecord(
        backend_id,
        status,
        output if status.orderly else b"",
        gas - applied,
        tuple(trace),
        error,
        applied,
        time.perf_counter() - started,
    )


def replay_gas(op_seq, schedule: GasSchedule, refund: int = 0) -> int:
    """Recompute gas from a raw (unfused) trace; the additivity oracle."""
    return sum(schedule.costs[name] for name in op_seq) - refund
