"""Campaign configuration, loaded from a single JSON file."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from typing import Any, Dict, List, Optional

from ..harness.protocol import PROTOCOL_VERSION
from ..harness.runner import DEFAULT_WALL_LIMIT, BackendHandle, Limits
from ..inputgen import ValuePool
from ..mutation.strategy import ALPHA, StrategyChoice
from ..scheduler import DEFAULT_POOL_CAP
from ..vm.backends import PROFILES
from ..vm.gas import load_schedule
from ..vm.interpreter import DEFAULT_GAS_LIMIT, DEFAULT_STEP_LIMIT

BUILTIN_PREFIX = "builtin:"
STOP_CONDITIONS = (None, "divergence", "gas-divergence", "finding")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class SeedSpec:
    path: str
    function: Optional[str] = None  # default: first callable function
    args: Optional[tuple] = None  # fixed inputs; default: drawn from the value pools

    def read(self) -> str:
        if self.path.startswith(BUILTIN_PREFIX):
            name = self.path[len(BUILTIN_PREFIX):]
            try:
                return resources.files("contractdiff.seeds").joinpath(f"{name}.msol").read_text()
            except FileNotFoundError:
                raise ConfigError(f"no bundled seed named {name!r}") from None
        with open(self.path) as fh:
            return fh.read()

    @property
    def lineage(self) -> str:
        base = self.path[len(BUILTIN_PREFIX):] if self.path.startswith(BUILTIN_PREFIX) else os.path.basename(self.path)
        return base[:-5] if base.endswith(".msol") else base


@dataclass(frozen=True)
class BackendSpec:
    id: str
    profile: Optional[str] = None  # builtin
    argv: Optional[tuple] = None  # external adapter command line
    gas_schedule: Optional[str] = None
    gas_deltas: Optional[Dict[str, int]] = None
    refund_cap_divisor: Optional[int] = None
    protocol: int = PROTOCOL_VERSION

    def handle(self) -> BackendHandle:
        if self.argv:
            return BackendHandle.external(self.id, self.argv, self.protocol)
        return BackendHandle.builtin(
            self.profile,
            self.id,
            schedule=load_schedule(self.gas_schedule),
            gas_deltas=self.gas_deltas,
            refund_cap_divisor=self.refund_cap_divisor,
        )


def bundled_seeds() -> List[str]:
    names = sorted(
        p.name[:-5] for p in resources.files("contractdiff.seeds").iterdir() if p.name.endswith(".msol")
    )
    return [BUILTIN_PREFIX + n for n in names]


@dataclass(frozen=True)
class CampaignConfig:
    corpus: str = "corpus"
    seeds: tuple = ()
    backends: tuple = ()
    strategy: StrategyChoice = StrategyChoice.ALL
    iterations: int = 200
    wall_clock: Optional[float] = None
    seed: int = 0
    gas_limit: int = DEFAULT_GAS_LIMIT
    step_limit: int = DEFAULT_STEP_LIMIT
    wall_limit: float = DEFAULT_WALL_LIMIT
    value_pools: Dict[str, list] = field(default_factory=dict)
    pool_cap: int = DEFAULT_POOL_CAP
    alpha: float = ALPHA
    regenerate_inputs: bool = False
    stop_on: Optional[str] = None
    persist: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not isinstance(self.iterations, int) or self.iterations <= 0:
            raise ConfigError(f"iterations must be a positive integer, got {self.iterations!r}")
        if self.wall_clock is not None and not self.wall_clock > 0:
            raise ConfigError("wall_clock must be positive")
        if len(self.backends) < 2:
            raise ConfigError(f"at least 2 backends are required, got {len(self.backends)}")
        ids = [b.id for b in self.backends]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate backend ids {ids}")
        for b in self.backends:
            if not b.argv and b.profile not in PROFILES:
                raise ConfigError(f"backend {b.id!r}: unknown profile {b.profile!r}")
        if not self.seeds:
            raise ConfigError("no seed contracts given")
        if self.pool_cap < 1:
            raise ConfigError("pool_cap must be >= 1")
        if self.alpha < 0:
            raise ConfigError("alpha must be non-negative")
        if self.stop_on not in STOP_CONDITIONS:
            raise ConfigError(f"stop_on must be one of {STOP_CONDITIONS}")
        try:
            Limits(self.gas_limit, self.step_limit, self.wall_limit)
            ValuePool(self.value_pools)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def limits(self) -> Limits:
        return Limits(self.gas_limit, self.step_limit, self.wall_limit)

    def value_pool(self) -> ValuePool:
        return ValuePool(self.value_pools)

    def handles(self) -> List[BackendHandle]:
        return [b.handle() for b in self.backends]

    def with_overrides(self, **kw) -> "CampaignConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        try:
            return replace(self, **kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["strategy"] = self.strategy.value
        d["seeds"] = [_drop_none(asdict(s)) for s in self.seeds]
        d["backends"] = [_drop_none(asdict(b)) for b in self.backends]
        for s in d["seeds"]:
            if "args" in s:
                s["args"] = [a.hex() if isinstance(a, (bytes, bytearray)) else a for a in s["args"]]
        return d


def _drop_none(d: dict) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items() if v is not None}


_KEYS = {f for f in CampaignConfig.__dataclass_fields__}


def _seed_spec(raw, base: str) -> SeedSpec:
    if isinstance(raw, str):
        raw = {"path": raw}
    if not isinstance(raw, dict) or "path" not in raw:
        raise ConfigError(f"bad seed entry {raw!r}")
    unknown = set(raw) - {"path", "function", "args"}
    if unknown:
        raise ConfigError(f"unknown seed keys {sorted(unknown)}")
    path = raw["path"]
    if not path.startswith(BUILTIN_PREFIX) and not os.path.isabs(path):
        path = os.path.join(base, path)
    args = raw.get("args")
    return SeedSpec(path, raw.get("function"), tuple(args) if args is not None else None)


def _backend_spec(raw, base: str) -> BackendSpec:
    if isinstance(raw, str):
        raw = {"id": raw, "profile": raw}
    if not isinstance(raw, dict):
        raise ConfigError(f"bad backend entry {raw!r}")
    known = set(BackendSpec.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown backend keys {sorted(unknown)}")
    raw = dict(raw)
    raw.setdefault("id", raw.get("profile"))
    if not raw["id"]:
        raise ConfigError(f"backend entry needs an id: {raw!r}")
    if raw.get("argv"):
        raw["argv"] = tuple(raw["argv"])
    if raw.get("gas_schedule") and not os.path.isabs(raw["gas_schedule"]):
        raw["gas_schedule"] = os.path.join(base, raw["gas_schedule"])
    return BackendSpec(**raw)


def config_from_dict(raw: Dict[str, Any], base: str = ".") -> CampaignConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    kw = dict(raw)
    kw["seeds"] = tuple(_seed_spec(s, base) for s in raw.get("seeds") or bundled_seeds())
    kw["backends"] = tuple(_backend_spec(b, base) for b in raw.get("backends") or ("reference", "gas_variant"))
    if "strategy" in kw:
        try:
            kw["strategy"] = StrategyChoice.parse(kw["strategy"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if "corpus" in kw and not os.path.isabs(kw["corpus"]):
        kw["corpus"] = os.path.join(base, kw["corpus"])
    try:
        return CampaignConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: Optional[str]) -> CampaignConfig:
    """Read a config file; ``None`` gives the defaults (bundled seeds)."""
    if path is None:
        return config_from_dict({})
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return config_from_dict(raw, os.path.dirname(os.path.abspath(path)))


def default_config(**kw) -> CampaignConfig:
    """Defaults with keyword overrides; seeds/backends accept the JSON shapes."""
    return config_from_dict(kw)
