"""Builtin backend profiles with injectable divergences."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Optional

from .gas import REFERENCE, GasSchedule
from .interpreter import ExecutionRecord, VmConfig, execute

PROFILES = ("reference", "gas_variant", "trace_variant", "fragile")

# Perturbation applied by the gas_variant profile.  MSTORE and JUMPDEST are
# left alone by default because every compiled function touches them, which
# would make the divergence unconditional; pass ``gas_deltas`` to add them.
GAS_VARIANT_DELTAS = {"SSTORE": 1000, "SLOAD": 600}
GAS_VARIANT_REFUND_CAP_DIVISOR = 5


@dataclass(frozen=True)
class Backend:
    backend_id: str
    profile: str
    config: VmConfig

    def run(
        self,
        code: bytes,
        calldata: bytes,
        gas_limit: Optional[int] = None,
        step_limit: Optional[int] = None,
        deadline: Optional[float] = None,
    ) -> ExecutionRecord:
        cfg = self.config.with_limits(gas_limit, step_limit)
        return execute(code, calldata, cfg, backend_id=self.backend_id, deadline=deadline)


def make_backend(
    profile: str,
    backend_id: Optional[str] = None,
    schedule: GasSchedule = REFERENCE,
    gas_deltas: Optional[Mapping[str, int]] = None,
    refund_cap_divisor: Optional[int] = None,
    **limits,
) -> Backend:
    """Build a backend whose config is ``schedule`` modified per ``profile``.

    ``limits`` may carry ``gas_limit`` / ``step_limit`` defaults.
    """
    cfg = VmConfig(schedule=schedule, **limits)
    if profile == "reference":
        pass
    elif profile == "gas_variant":
        deltas = GAS_VARIANT_DELTAS if gas_deltas is None else gas_deltas
        cap = refund_cap_divisor or GAS_VARIANT_REFUND_CAP_DIVISOR
        cfg = replace(cfg, schedule=schedule.perturbed(deltas, cap, name=f"{schedule.name}/gas_variant"))
    elif profile == "trace_variant":
        cfg = replace(cfg, trace_optimization="fused")
    elif profile == "fragile":
        cfg = replace(cfg, step_guard=False)
    else:
        raise ValueError(f"unknown backend profile {profile!r}; expected one of {PROFILES}")
    return Backend(backend_id or profile, profile, cfg)
