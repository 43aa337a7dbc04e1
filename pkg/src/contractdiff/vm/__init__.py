"""Compiler, interpreter and builtin backends."""
from .backends import PROFILES, Backend, make_backend
from .compiler import CompileError, Compiled, compile_contract
from .gas import REFERENCE, GasSchedule, load_schedule
from .interpreter import ExecutionRecord, Status, VmConfig, WallLimitExceeded, execute, replay_gas
from .opcodes import OPCODES, assemble, disassemble

compile = compile_contract  # noqa: A001

__all__ = [
    "PROFILES", "Backend", "make_backend", "CompileError", "Compiled", "compile_contract",
    "compile", "REFERENCE", "GasSchedule", "load_schedule", "ExecutionRecord", "Status",
    "VmConfig", "WallLimitExceeded", "execute", "replay_gas", "OPCODES", "assemble",
    "disassemble",
]
