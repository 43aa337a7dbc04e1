"""Protocol v1: newline-delimited JSON over an adapter process's stdio.

Request::

    {"bytecode": "<hex>", "calldata": "<hex>", "gas_limit": N, "step_limit": N}

Response::

    {"status": "Success", "output": "<hex>", "gas_used": N, "op_seq": ["PUSH1", ...]}
"""
from __future__ import annotations

import json
import os
import select
import subprocess
import time
from dataclasses import replace
from typing import List, Optional, Sequence

from ..vm.interpreter import ExecutionRecord, Status

PROTOCOL_VERSION = 1
_MAX_LINE = 64 << 20


class ProtocolError(Exception):
    def __init__(self, detail: str):
        self.detail = detail
        super().__init__(detail)


def encode_request(code: bytes, calldata: bytes, gas_limit: int, step_limit: int) -> bytes:
    req = {"bytecode": code.hex(), "calldata": calldata.hex(), "gas_limit": gas_limit, "step_limit": step_limit}
    return (json.dumps(req, separators=(",", ":")) + "\n").encode()


def decode_request(line: bytes) -> dict:
    try:
        req = json.loads(line)
        return {
            "bytecode": bytes.fromhex(req["bytecode"]),
            "calldata": bytes.fromhex(req["calldata"]),
            "gas_limit": int(req["gas_limit"]),
            "step_limit": int(req["step_limit"]),
        }
    except (ValueError, KeyError, TypeError) as exc:
        raise ProtocolError(f"bad request: {exc}") from None


def encode_response(rec: ExecutionRecord) -> bytes:
    resp = {"status": rec.status.value, "output": rec.output.hex(), "gas_used": rec.gas_used, "op_seq": list(rec.op_seq)}
    return (json.dumps(resp, separators=(",", ":")) + "\n").encode()


def decode_response(line: bytes, backend_id: str) -> ExecutionRecord:
    try:
        resp = json.loads(line)
    except ValueError as exc:
        raise ProtocolError(f"response is not JSON: {exc}") from None
    if not isinstance(resp, dict):
        raise ProtocolError("response is not an object")
    missing = [k for k in ("status", "output", "gas_used", "op_seq") if k not in resp]
    if missing:
        raise ProtocolError(f"response lacks {missing}")
    try:
        status = Status(resp["status"])
    except ValueError:
        raise ProtocolError(f"unknown status {resp['status']!r}") from None
    try:
        output = bytes.fromhex(resp["output"])
    except (TypeError, ValueError):
        raise ProtocolError(f"invalid output hex {resp['output']!r}") from None
    gas = resp["gas_used"]
    if not isinstance(gas, int) or isinstance(gas, bool) or gas < 0:
        raise ProtocolError(f"invalid gas_used {gas!r}")
    ops = resp["op_seq"]
    if not isinstance(ops, list) or not all(isinstance(o, str) for o in ops):
        raise ProtocolError("op_seq must be a list of opcode names")
    return ExecutionRecord(backend_id, status, output if status.orderly else b"", gas, tuple(ops), resp.get("error"))


class AdapterProcess:
    """A long-lived adapter child; restarted after a timeout or death."""

    def __init__(self, argv: Sequence[str], backend_id: str):
        self.argv = list(argv)
        self.backend_id = backend_id
        self.proc: Optional[subprocess.Popen] = None
        self._buf = b""

    def _ensure(self) -> subprocess.Popen:
        if self.proc is None or self.proc.poll() is not None:
            self._buf = b""
            self.proc = subprocess.Popen(
                self.argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                bufsize=0,
            )
        return self.proc

    def kill(self) -> None:
        if self.proc is not None:
            if self.proc.poll() is None:
                self.proc.kill()
            self.proc.wait()
            for stream in (self.proc.stdin, self.proc.stdout):
                try:
                    stream.close()
                except OSError:
                    pass
        self.proc = None
        self._buf = b""

    close = kill

    def _readline(self, deadline: float) -> bytes:
        fd = self.proc.stdout.fileno()
        while b"\n" not in self._buf:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                raise TimeoutError
            chunk = os.read(fd, 65536)
            if not chunk:
                raise ProtocolError(f"adapter exited (code {self.proc.poll()})")
            self._buf += chunk
            if len(self._buf) > _MAX_LINE:
                raise ProtocolError("response line too long")
        line, _, self._buf = self._buf.partition(b"\n")
        return line

    def request(self, code: bytes, calldata: bytes, gas_limit: int, step_limit: int, wall_limit: float) -> ExecutionRecord:
        """One round trip; every failure mode becomes a BackendCrash record."""
        started = time.perf_counter()
        deadline = time.monotonic() + wall_limit
        try:
            proc = self._ensure()
            try:
                proc.stdin.write(encode_request(code, calldata, gas_limit, step_limit))
                proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise ProtocolError(f"cannot write request: {exc}") from None
            rec = decode_response(self._readline(deadline), self.backend_id)
        except TimeoutError:
            self.kill()
            return _crash(self.backend_id, "wall-limit", started)
        except ProtocolError as exc:
            self.kill()
            return _crash(self.backend_id, f"protocol: {exc.detail}", started)
        except OSError as exc:
            self.kill()
            return _crash(self.backend_id, f"spawn: {exc}", started)
        return replace(rec, wall_time=time.perf_counter() - started)


def _crash(backend_id: str, detail: str, started: float) -> ExecutionRecord:
    return ExecutionRecord(backend_id, Status.BACKEND_CRASH, error=detail, wall_time=time.perf_counter() - started)


def serve(run, stdin=None, stdout=None) -> int:
    """Adapter side: answer each request line with ``run(**request)``."""
    import sys

    stdin = stdin or sys.stdin.buffer
    stdout = stdout or sys.stdout.buffer
    for line in stdin:
        if not line.strip():
            continue
        req = decode_request(line)
        stdout.write(encode_response(run(**req)))
        stdout.flush()
    return 0


def adapter_argv(profile: str, extra: Optional[List[str]] = None) -> List[str]:
    """Command line for the bundled adapter wrapping a builtin profile."""
    import sys

    return [sys.executable, "-m", "contractdiff.harness.adapter", "--profile", profile] + list(extra or [])
