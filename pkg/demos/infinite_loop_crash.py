"""
A loop that never ends
======================

The reference VM stops at its step limit. The fragile one has no guard, so
the harness kills it at the wall-clock limit and reports a crash.
"""
from importlib import resources

from contractdiff.abi import encode_call
from contractdiff.harness import BackendHandle, Limits, aggregate, run_all
from contractdiff.lang import parse
from contractdiff.vm import compile_contract

source = resources.files("contractdiff.seeds").joinpath("forTest.msol").read_text()
print(source)
compiled = compile_contract(parse(source), "TestWhile")
calldata = encode_call(compiled.signature, [1, 2])

handles = [BackendHandle.builtin("reference"), BackendHandle.builtin("fragile")]
limits = Limits(gas_limit=10**9, step_limit=50_000, wall_limit=0.5)
records = run_all(handles, compiled.code, calldata, limits)

for r in records:
    print(f"{r.backend_id:10s} {r.status.value:20s} gas={r.gas_used:<8d} ops={len(r.op_seq):<7d} {r.error or ''}")

diff = aggregate(records)
print("classification:", diff.classification.value)
print("aggregate diff:", diff.aggregate_diff)
