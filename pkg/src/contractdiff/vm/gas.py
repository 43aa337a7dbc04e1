"""Gas schedules loaded from JSON tables."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

from .opcodes import NAMES, OPCODES

_WILDCARDS = ("PUSH", "DUP", "SWAP")


@dataclass(frozen=True)
class GasSchedule:
    """Per-opcode costs plus refund rules.

    ``refunds`` maps a rule name to gas units; the only rule the interpreter
    knows is ``"SSTORE_CLEAR"`` (a nonzero slot overwritten with zero).  The
    refund granted at the end of a successful run is capped at
    ``gas_used // refund_cap_divisor``.
    """

    costs: Mapping[str, int]
    refunds: Mapping[str, int] = field(default_factory=dict)
    refund_cap_divisor: int = 2
    name: str = "custom"

    def __post_init__(self):
        missing = sorted(set(OPCODES) - set(self.costs))
        if missing:
            raise ValueError(f"gas schedule {self.name!r} lacks costs for {missing}")
        bad = {k: v for k, v in self.costs.items() if not isinstance(v, int) or v < 0}
        if bad:
            raise ValueError(f"gas costs must be non-negative integers: {bad}")
        if self.refund_cap_divisor < 1:
            raise ValueError("refund_cap_divisor must be >= 1")

    def by_byte(self) -> list:
        table = [self.costs["INVALID"]] * 256
        for byte, name in NAMES.items():
            table[byte] = self.costs[name]
        return table

    def refund(self, rule: str) -> int:
        return self.refunds.get(rule, 0)

    def perturbed(
        self,
        deltas: Mapping[str, int] = (),
        refund_cap_divisor: Optional[int] = None,
        name: Optional[str] = None,
    ) -> "GasSchedule":
        costs = dict(self.costs)
        for op, delta in dict(deltas).items():
            costs[op] = max(0, costs[op] + delta)
        return GasSchedule(
            costs,
            dict(self.refunds),
            refund_cap_divisor or self.refund_cap_divisor,
            name or f"{self.name}+perturbed",
        )

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "costs": dict(sorted(self.costs.items())),
            "refunds": dict(self.refunds),
            "refund_cap_divisor": self.refund_cap_divisor,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "GasSchedule":
        costs: Dict[str, int] = {}
        for key, value in data["costs"].items():
            if key.endswith("*") and key[:-1] in _WILDCARDS:
                for op in OPCODES:
                    if op.startswith(key[:-1]) and op[len(key) - 1 :].isdigit():
                        costs.setdefault(op, value)
            else:
                if key not in OPCODES:
                    raise ValueError(f"unknown opcode in gas schedule: {key}")
                costs[key] = value
        # explicit entries win over wildcards regardless of order
        costs.update({k: v for k, v in data["costs"].items() if not k.endswith("*")})
        return cls(
            costs,
            dict(data.get("refunds", {})),
            int(data.get("refund_cap_divisor", 2)),
            data.get("name", "custom"),
        )


def load_schedule(source: Union[str, Path, Mapping, None] = None) -> GasSchedule:
    """Load a schedule from a JSON path or mapping; ``None`` gives the reference table."""
    if source is None:
        text = resources.files("contractdiff.data").joinpath("gas_reference.json").read_text()
        return GasSchedule.from_dict(json.loads(text))
    if isinstance(source, Mapping):
        return GasSchedule.from_dict(source)
    return GasSchedule.from_dict(json.loads(Path(source).read_text()))


REFERENCE = load_schedule()
