"""Run one bytecode + calldata across a roster of backends."""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

from ..vm.backends import Backend, make_backend
from ..vm.gas import GasSchedule
from ..vm.interpreter import DEFAULT_GAS_LIMIT, DEFAULT_STEP_LIMIT, ExecutionRecord, Status, WallLimitExceeded
from .metrics import TooFewBackends
from .protocol import PROTOCOL_VERSION, AdapterProcess

DEFAULT_WALL_LIMIT = 10.0


@dataclass(frozen=True)
class Limits:
    gas_limit: int = DEFAULT_GAS_LIMIT
    step_limit: int = DEFAULT_STEP_LIMIT
    wall_limit: float = DEFAULT_WALL_LIMIT

    def __post_init__(self):
        if self.gas_limit < 1 or self.step_limit < 1 or not self.wall_limit > 0:
            raise ValueError("limits must be positive")


@dataclass
class BackendHandle:
    backend_id: str
    kind: str  # "builtin" or "external"
    backend: Optional[Backend] = None
    argv: Tuple[str, ...] = ()
    protocol_version: int = PROTOCOL_VERSION
    _proc: Optional[AdapterProcess] = field(default=None, repr=False, compare=False)

    @classmethod
    def builtin(cls, profile: str, backend_id: Optional[str] = None, **kwargs) -> "BackendHandle":
        b = make_backend(profile, backend_id, **kwargs)
        return cls(b.backend_id, "builtin", backend=b)

    @classmethod
    def external(cls, backend_id: str, argv: Sequence[str], protocol_version: int = PROTOCOL_VERSION) -> "BackendHandle":
        if protocol_version != PROTOCOL_VERSION:
            raise ValueError(f"unsupported protocol version {protocol_version}")
        return cls(backend_id, "external", argv=tuple(argv), protocol_version=protocol_version)

    def describe(self) -> dict:
        if self.kind == "builtin":
            return {
                "id": self.backend_id,
                "kind": "builtin",
                "profile": self.backend.profile,
                "schedule": self.backend.config.schedule.to_dict(),
            }
        return {"id": self.backend_id, "kind": "external", "argv": list(self.argv), "protocol": self.protocol_version}

    @classmethod
    def from_description(cls, d: dict) -> "BackendHandle":
        """Inverse of :meth:`describe`; the stored schedule is used as is."""
        if d["kind"] == "external":
            return cls.external(d["id"], d["argv"], d.get("protocol", PROTOCOL_VERSION))
        h = cls.builtin(d["profile"], d["id"])
        if "schedule" in d:
            cfg = replace(h.backend.config, schedule=GasSchedule.from_dict(d["schedule"]))
            h.backend = replace(h.backend, config=cfg)
        return h

    def run(self, code: bytes, calldata: bytes, limits: Limits) -> ExecutionRecord:
        started = time.perf_counter()
        if self.kind == "external":
            if self._proc is None:
                self._proc = AdapterProcess(self.argv, self.backend_id)
            return self._proc.request(code, calldata, limits.gas_limit, limits.step_limit, limits.wall_limit)
        try:
            return self.backend.run(
                code, calldata, limits.gas_limit, limits.step_limit, deadline=time.monotonic() + limits.wall_limit
            )
        except WallLimitExceeded:
            detail = "wall-limit"
        except Exception as exc:  # a backend bug must not take the harness down
            detail = f"{type(exc).__name__}: {exc}"
        return ExecutionRecord(
            self.backend_id, Status.BACKEND_CRASH, error=detail, wall_time=time.perf_counter() - started
        )

    def close(self) -> None:
        if self._proc is not None:
            self._proc.close()
            self._proc = None


def check_roster(handles: Sequence[BackendHandle]) -> None:
    if len(handles) < 2:
        raise TooFewBackends(f"differential testing needs at least 2 backends, got {len(handles)}")
    ids = [h.backend_id for h in handles]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate backend ids in {ids}")


def run_all(
    handles: Sequence[BackendHandle],
    code: bytes,
    calldata: bytes,
    limits: Limits = Limits(),
    parallel: bool = True,
) -> List[ExecutionRecord]:
    """One record per handle, in roster order.

    External adapters run concurrently (they are separate processes); builtin
    backends share the interpreter lock, so they run in turn.
    """
    check_roster(handles)
    results: List[Optional[ExecutionRecord]] = [None] * len(handles)
    external = [k for k, h in enumerate(handles) if h.kind == "external"]
    pool = None
    futures = {}
    if parallel and len(external) > 1:
        pool = ThreadPoolExecutor(max_workers=len(external))
        futures = {k: pool.submit(handles[k].run, code, calldata, limits) for k in external}
    try:
        for k, h in enumerate(handles):
            if k not in futures:
                results[k] = h.run(code, calldata, limits)
        for k, fut in futures.items():
            results[k] = fut.result()
    finally:
        if pool is not None:
            pool.shutdown(wait=True)
    return results  # type: ignore[return-value]
