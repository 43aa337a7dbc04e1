import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from contractdiff.abi import AbiSignature, decode_call, encode_call
from contractdiff.lang import parse
from contractdiff.lang.generate import random_contract
from contractdiff.vm import (
    OPCODES,
    REFERENCE,
    GasSchedule,
    Status,
    VmConfig,
    assemble,
    compile_contract,
    disassemble,
    execute,
    load_schedule,
    make_backend,
    replay_gas,
)
from contractdiff.vm.backends import GAS_VARIANT_DELTAS
from contractdiff.vm.interpreter import WallLimitExceeded

from conftest import SEED_NAMES, seed_tree

ADD = "contract A { function f(uint256 a, uint256 b) public returns (uint256) { return a + b; } }"
C = REFERENCE.costs


def run_src(src, args, fn=None, **cfg):
    tree = parse(src)
    compiled = compile_contract(tree, fn)
    return execute(compiled.code, encode_call(compiled.signature, args), VmConfig(**cfg))


def word(x):
    return x.to_bytes(32, "big")


def test_add_returns_three():
    rec = run_src(ADD, [1, 2])
    assert rec.status is Status.SUCCESS
    assert rec.output == word(3)


def test_push_add_stop_gas_hand_traced():
    code = assemble([("PUSH1", 1), ("PUSH1", 2), "ADD", "STOP"])
    rec = execute(code, b"")
    assert rec.status is Status.SUCCESS
    assert rec.op_seq == ("PUSH1", "PUSH1", "ADD", "STOP")
    assert rec.gas_used == 2 * C["PUSH1"] + C["ADD"] + C["STOP"] == 9


def test_for_test_loops_until_step_limit(for_test):
    compiled = compile_contract(for_test, "TestWhile")
    rec = execute(compiled.code, encode_call(compiled.signature, [1, 2]), VmConfig(step_limit=10_000))
    assert rec.status is Status.STEP_LIMIT
    assert len(rec.op_seq) == 10_000
    assert rec.gas_used == replay_gas(rec.op_seq, REFERENCE)
    done = execute(compiled.code, encode_call(compiled.signature, [2, 1]), VmConfig(step_limit=10_000))
    assert done.status is Status.SUCCESS


def test_for_test_bytecode_has_lt_back_edge(for_test):
    code = compile_contract(for_test, "TestWhile").code
    ops = disassemble(code)
    dests = {pc for pc, name, _ in ops if name == "JUMPDEST"}
    # a backward unconditional jump whose target is a JUMPDEST followed by the LT test
    back = [(pc, imm) for (pc, name, imm), nxt in zip(ops, ops[1:]) if name == "PUSH2" and nxt[1] == "JUMP" and imm < pc]
    assert back
    target = back[-1][1]
    assert target in dests
    names_after = [name for pc, name, _ in ops if pc >= target][:8]
    assert "LT" in names_after


def test_bad_jump_destination():
    code = assemble([("PUSH1", 3), "JUMP", "STOP", "STOP"])
    rec = execute(code, b"")
    assert rec.status is Status.VM_ERROR and rec.error == "bad-jump-destination"


def test_jumpdest_inside_push_immediate_is_not_a_target():
    code = assemble([("PUSH1", 3), "JUMP", ("PUSH1", OPCODES["JUMPDEST"]), "STOP"])
    assert execute(code, b"").error == "bad-jump-destination"


def test_stack_underflow_and_overflow():
    assert execute(assemble(["ADD"]), b"").error == "stack-underflow"
    code = assemble([("PUSH1", 0), "JUMPDEST", ("PUSH1", 1), ("PUSH1", 2), "JUMP"])
    rec = execute(code, b"")
    assert rec.status is Status.VM_ERROR and rec.error == "stack-overflow"


def test_invalid_and_undefined_opcodes():
    assert execute(assemble(["INVALID"]), b"").error == "invalid-instruction"
    assert execute(bytes([0x0C]), b"").error == "undefined-opcode"


def test_out_of_gas_is_partial_and_bounded():
    code = assemble([("PUSH1", 1), ("PUSH1", 2), "ADD", "STOP"])
    rec = execute(code, b"", VmConfig(gas_limit=7))
    assert rec.status is Status.OUT_OF_GAS
    assert rec.gas_used == 6 and rec.op_seq == ("PUSH1", "PUSH1")
    assert rec.output == b""


def test_revert_returns_data():
    code = assemble([("PUSH1", 42), ("PUSH1", 0), "MSTORE", ("PUSH1", 32), ("PUSH1", 0), "REVERT"])
    rec = execute(code, b"")
    assert rec.status is Status.REVERT and rec.output == word(42)


def test_unknown_selector_reverts():
    tree = parse(ADD)
    code = compile_contract(tree).code
    rec = execute(code, b"\xde\xad\xbe\xef")
    assert rec.status is Status.REVERT and rec.output == b""


def test_assert_failure_is_invalid_instruction():
    src = "contract A { function f(uint a) public { assert(a > 5); } }"
    assert run_src(src, [9]).status is Status.SUCCESS
    rec = run_src(src, [1])
    assert rec.status is Status.VM_ERROR and rec.error == "invalid-instruction"


def test_signed_arithmetic():
    src = """contract S {
        function d(int a, int b) public returns (int) { return a / b; }
        function m(int a, int b) public returns (int) { return a % b; }
        function lt(int a, int b) public returns (bool) { return a < b; }
    }"""
    tree = parse(src)
    W = 2**256

    def call(fn, a, b):
        c = compile_contract(tree, fn)
        rec = execute(c.code, encode_call(c.signature, [a, b]))
        return int.from_bytes(rec.output, "big")

    assert call("d", -7, 2) == (-3) % W
    assert call("m", -7, 2) == (-1) % W
    assert call("d", 7, -2) == (-3) % W
    assert call("d", 5, 0) == 0 and call("m", 5, 0) == 0
    assert call("d", -(2**255), -1) == 2**255
    assert call("lt", -1, 0) == 1


def test_bool_and_address_storage_normalized():
    src = """contract N {
        function f(uint v) public returns (bool) { bool b = v; return b; }
        function g(uint v) public returns (address) { address a = v; return a; }
    }"""
    assert run_src(src, [7], "f").output == word(1)
    assert run_src(src, [2**200 + 5], "g").output == word(5)


def test_refund_on_clearing_storage():
    src = """contract R {
        uint s = 1;
        function clear() public { s = 0; }
    }"""
    rec = run_src(src, [], "clear")
    assert rec.status is Status.SUCCESS
    raw = replay_gas(rec.op_seq, REFERENCE)
    assert rec.refund == min(REFERENCE.refund("SSTORE_CLEAR"), raw // 2)
    assert rec.gas_used == raw - rec.refund


def test_compile_is_deterministic():
    for name in SEED_NAMES:
        tree = seed_tree(name)
        assert compile_contract(tree).code == compile_contract(tree).code


def test_gas_schedule_validation_and_loading(tmp_path):
    with pytest.raises(ValueError):
        GasSchedule({"ADD": 3})
    costs = dict(REFERENCE.costs)
    costs["ADD"] = -1
    with pytest.raises(ValueError):
        GasSchedule(costs)
    path = tmp_path / "g.json"
    path.write_text('{"costs": {"PUSH*": 3, "DUP*": 3, "SWAP*": 3, ' + ", ".join(
        f'"{k}": {v}' for k, v in REFERENCE.costs.items() if not k.startswith(("PUSH", "DUP", "SWAP"))
    ) + "}}")
    assert load_schedule(str(path)).costs == REFERENCE.costs


# -- profiles -----------------------------------------------------------------


STORE = """contract S {
    uint s;
    function put(uint v) public returns (uint) { s = v; return v; }
    function pure_add(uint a, uint b) public returns (uint) { return a + b; }
}"""


def _run_profile(profile, src, fn, args, **kw):
    tree = parse(src)
    c = compile_contract(tree, fn)
    return make_backend(profile, **kw).run(c.code, encode_call(c.signature, args))


def test_gas_variant_equal_on_arithmetic_only():
    a = _run_profile("reference", STORE, "pure_add", [1, 2])
    b = _run_profile("gas_variant", STORE, "pure_add", [1, 2])
    assert a == replace(b, backend_id=a.backend_id)
    assert a.gas_used == b.gas_used


def test_gas_variant_one_sstore_differs_by_delta():
    a = _run_profile("reference", STORE, "put", [5])
    b = _run_profile("gas_variant", STORE, "put", [5])
    assert a.op_seq.count("SSTORE") == 1 and "SLOAD" not in a.op_seq
    assert b.gas_used - a.gas_used == GAS_VARIANT_DELTAS["SSTORE"]
    assert a.output == b.output


def test_gas_variant_custom_deltas():
    a = _run_profile("reference", STORE, "put", [5])
    b = _run_profile("gas_variant", STORE, "put", [5], gas_deltas={"MSTORE": 2, "JUMPDEST": 1})
    expected = 2 * a.op_seq.count("MSTORE") + a.op_seq.count("JUMPDEST")
    assert b.gas_used - a.gas_used == expected


def test_trace_variant_changes_only_op_seq():
    tree = seed_tree("Demo")
    c = compile_contract(tree, "pay")
    cd = encode_call(c.signature, [0x1234, 9])
    a = make_backend("reference").run(c.code, cd)
    b = make_backend("trace_variant").run(c.code, cd)
    assert (a.status, a.output, a.gas_used) == (b.status, b.output, b.gas_used)
    # oracle re-trace: drop every POP that directly follows a PUSH, and that PUSH
    fused = []
    for op in a.op_seq:
        if op == "POP" and fused and fused[-1].startswith("PUSH"):
            fused.pop()
        else:
            fused.append(op)
    assert list(b.op_seq) == fused
    assert len(b.op_seq) < len(a.op_seq)


def test_fragile_profile_needs_a_deadline(for_test):
    import time

    c = compile_contract(for_test, "TestWhile")
    cd = encode_call(c.signature, [1, 2])
    with pytest.raises(WallLimitExceeded):
        make_backend("fragile").run(c.code, cd, gas_limit=10**12, deadline=time.monotonic() + 0.2)


def test_unknown_profile():
    with pytest.raises(ValueError):
        make_backend("nope")


# -- properties -----------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_gas_additivity_and_determinism(seed):
    rng = random.Random(seed)
    tree = random_contract(rng)
    c = compile_contract(tree)
    args = [rng.choice([0, 1, 2, 2**255, 2**256 - 1]) if t != "bool" else rng.random() < 0.5 for t in c.signature.params]
    args = [a if t != "int256" else (a - 2**256 if a >= 2**255 else a) for a, t in zip(args, c.signature.params)]
    cd = encode_call(c.signature, args)
    cfg = VmConfig(step_limit=50_000)
    rec = execute(c.code, cd, cfg)
    assert rec == execute(c.code, cd, cfg)
    assert rec.gas_used == replay_gas(rec.op_seq, REFERENCE, rec.refund)
    assert rec.gas_used <= cfg.gas_limit and len(rec.op_seq) <= cfg.step_limit


@settings(max_examples=100, deadline=None)
@given(st.binary(max_size=64), st.integers(1, 200))
def test_arbitrary_bytes_terminate(code, steps):
    rec = execute(code, b"", VmConfig(step_limit=steps, gas_limit=10**6))
    assert len(rec.op_seq) <= steps
    assert rec.status in set(Status) - {Status.BACKEND_CRASH}


def test_abi_round_trip_and_selector():
    sig = AbiSignature("f", ("uint256", "int256", "bool", "address", "bytes32", "bytes"))
    values = [2**256 - 1, -5, True, 2**160 - 1, 0, b"\x01\x02"]
    data = encode_call(sig, values)
    assert data[:4] == sig.selector and len(sig.selector) == 4
    assert decode_call(sig, data) == values
    assert AbiSignature.parse(sig.canonical) == sig
