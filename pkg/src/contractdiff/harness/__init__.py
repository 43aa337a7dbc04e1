"""Multi-backend execution, divergence metrics and the adapter protocol."""
from .metrics import (
    CRASH_CLASS,
    Classification,
    DiffReport,
    PairDiff,
    TooFewBackends,
    UndefinedIndicator,
    aggregate,
    classify,
    crash_vector,
    gas_diff,
    op_diff,
    refine,
)
from .protocol import PROTOCOL_VERSION, AdapterProcess, ProtocolError, adapter_argv
from .runner import BackendHandle, Limits, check_roster, run_all

__all__ = [
    "CRASH_CLASS", "Classification", "DiffReport", "PairDiff", "TooFewBackends", "UndefinedIndicator",
    "aggregate", "classify", "crash_vector", "gas_diff", "op_diff", "refine", "PROTOCOL_VERSION",
    "AdapterProcess", "ProtocolError", "adapter_argv", "BackendHandle", "Limits", "check_roster", "run_all",
]
