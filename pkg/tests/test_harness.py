import itertools
import sys
import textwrap
import time

import pytest
from hypothesis import given, settings, strategies as st

from contractdiff.abi import encode_call
from contractdiff.harness import (
    BackendHandle,
    Classification,
    Limits,
    TooFewBackends,
    UndefinedIndicator,
    adapter_argv,
    aggregate,
    crash_vector,
    gas_diff,
    op_diff,
    refine,
    run_all,
)
from contractdiff.harness.protocol import decode_response, encode_request
from contractdiff.lang import parse
from contractdiff.vm import Status, compile_contract
from contractdiff.vm.interpreter import ExecutionRecord

ADD = "contract A { function f(uint256 a, uint256 b) public returns (uint256) { return a + b; } }"


def rec(status=Status.SUCCESS, gas=0, n_ops=0, output=b"", bid="x", error=None):
    return ExecutionRecord(bid, status, output, gas, ("ADD",) * n_ops, error)


def test_gas_diff_examples():
    assert gas_diff(rec(gas=100), rec(gas=100)) == 0
    assert gas_diff(rec(gas=100), rec(gas=150)) == pytest.approx(1 / 3)
    assert gas_diff(rec(gas=0), rec(gas=0)) == 0
    crash = rec(Status.BACKEND_CRASH)
    assert gas_diff(rec(gas=5), crash) == 1.0
    with pytest.raises(UndefinedIndicator):
        gas_diff(rec(gas=5), crash, strict=True)


def test_op_diff_examples():
    assert op_diff(rec(n_ops=4), rec(n_ops=4)) == 0
    assert op_diff(rec(n_ops=5), rec(n_ops=8)) == pytest.approx(3 / 8)
    assert op_diff(rec(Status.BACKEND_CRASH), rec(n_ops=3)) == 1.0


def test_same_output_different_lengths_is_not_out_vul():
    r = aggregate([rec(n_ops=1275, output=b"\x01", bid="a"), rec(n_ops=1200, output=b"\x01", bid="b")])
    assert r.per_pair[(0, 1)].op_diff > 0 and not r.out_vul
    assert r.classification is Classification.ALL_AGREE


def test_aggregate_examples():
    same = [rec(gas=10, n_ops=3, output=b"\x03", bid=str(k)) for k in range(4)]
    r = aggregate(same)
    assert r.classification is Classification.ALL_AGREE and r.aggregate_diff == 0
    assert set(r.per_pair) == set(itertools.combinations(range(4), 2))

    crashy = same[:3] + [rec(Status.BACKEND_CRASH, bid="3")]
    r = aggregate(crashy)
    assert r.classification is Classification.CRASH_ASYMMETRY and r.out_vul
    assert r.aggregate_diff == pytest.approx(6.0)

    r = aggregate([rec(output=b"\x01"), rec(output=b"\x02")])
    assert r.classification is Classification.OUTPUT_MISMATCH and r.out_vul


def test_step_limit_vs_killed_is_crash_asymmetry():
    r = aggregate([rec(Status.STEP_LIMIT, gas=50, n_ops=10), rec(Status.BACKEND_CRASH)])
    assert r.classification is Classification.CRASH_ASYMMETRY and r.out_vul


def test_revert_vs_success_sets_out_vul_only():
    r = aggregate([rec(Status.REVERT), rec(Status.SUCCESS)])
    assert r.out_vul and r.classification is Classification.OUTPUT_MISMATCH


def test_too_few_backends():
    with pytest.raises(TooFewBackends):
        aggregate([rec()])
    with pytest.raises(TooFewBackends):
        run_all([BackendHandle.builtin("reference")], b"", b"")


def _brute_refine(vectors):
    n = len(vectors[0])
    out = []
    for k in range(n):
        ind1 = sum(1 for v in vectors if not v[k] and all(v[j] for j in range(n) if j != k))
        ind2 = sum(1 for v in vectors if v[k] and not any(v[j] for j in range(n) if j != k))
        out.append((ind1, ind2))
    return out


def test_refine_examples():
    ok, crash = False, True
    assert refine([(ok, crash, crash, crash)])[0] == (1, 0)
    assert refine([(crash, ok, ok, ok)])[0] == (0, 1)
    assert refine([(crash, crash, ok, ok)]) == [(0, 0)] * 4


@pytest.mark.parametrize("n", [2, 3, 4])
def test_refine_exhaustive(n):
    vectors = list(itertools.product([False, True], repeat=n))
    for v in vectors:
        assert refine([v]) == _brute_refine([v])
    assert refine(vectors) == _brute_refine(vectors)


def test_crash_vector_uses_crash_class():
    rs = [rec(Status.SUCCESS), rec(Status.REVERT), rec(Status.OUT_OF_GAS), rec(Status.STEP_LIMIT),
          rec(Status.VM_ERROR), rec(Status.BACKEND_CRASH)]
    assert crash_vector(rs) == (False, False, True, True, True, True)


records = st.builds(
    rec,
    st.sampled_from(list(Status)),
    st.integers(0, 10**7),
    st.integers(0, 3000),
    st.sampled_from([b"", b"\x01", b"\x02"]),
)


@settings(max_examples=2000, deadline=None)
@given(records, records)
def test_metric_algebra(a, b):
    for f in (gas_diff, op_diff):
        assert f(a, b) == f(b, a)
        assert 0 <= f(a, b) <= 1
        if a.crashed or b.crashed:
            assert f(a, b) == 1.0
    if not a.crashed:
        assert gas_diff(a, a) == 0 and op_diff(a, a) == 0
        assert aggregate([a, a]).classification is Classification.ALL_AGREE
    r = aggregate([a, b])
    assert 0 <= r.aggregate_diff <= 2
    differs = a.gas_used != b.gas_used or len(a.op_seq) != len(b.op_seq) or a.crashed or b.crashed
    assert (r.aggregate_diff > 0) == differs


# -- runner and protocol -------------------------------------------------------------


def _add_call(a=1, b=2):
    c = compile_contract(parse(ADD))
    return c.code, encode_call(c.signature, [a, b])


def test_four_builtins_agree_on_add():
    code, cd = _add_call()
    handles = [BackendHandle.builtin(p) for p in ("reference", "gas_variant", "trace_variant", "fragile")]
    out = run_all(handles, code, cd)
    assert [r.status for r in out] == [Status.SUCCESS] * 4
    assert {r.output for r in out} == {(3).to_bytes(32, "big")}
    assert aggregate(out).classification is Classification.ALL_AGREE


def test_fragile_killed_by_wall_limit(for_test):
    c = compile_contract(for_test, "TestWhile")
    cd = encode_call(c.signature, [1, 2])
    handles = [BackendHandle.builtin("reference"), BackendHandle.builtin("fragile")]
    t0 = time.monotonic()
    out = run_all(handles, c.code, cd, Limits(gas_limit=10**12, step_limit=20_000, wall_limit=0.3))
    assert time.monotonic() - t0 < 5
    assert out[0].status is Status.STEP_LIMIT
    assert out[1].status is Status.BACKEND_CRASH and out[1].error == "wall-limit"
    assert out[1].gas_used == 0 and out[1].op_seq == ()
    assert aggregate(out).classification is Classification.CRASH_ASYMMETRY


def test_duplicate_ids_rejected():
    with pytest.raises(ValueError):
        run_all([BackendHandle.builtin("reference"), BackendHandle.builtin("reference")], b"", b"")


def _stub(tmp_path, body):
    path = tmp_path / "stub.py"
    path.write_text(textwrap.dedent("""
        import json, sys, time
        for line in sys.stdin:
            req = json.loads(line)
    """) + textwrap.indent(textwrap.dedent(body), "    "))
    return [sys.executable, str(path)]


def test_echo_stub_round_trip(tmp_path):
    argv = _stub(tmp_path, """
        print(json.dumps({"status": "Success", "output": "0a", "gas_used": 7, "op_seq": ["PUSH1", "STOP"]}), flush=True)
    """)
    h = BackendHandle.external("stub", argv)
    try:
        for _ in range(2):  # the process is reused
            r = h.run(b"\x00", b"", Limits(wall_limit=5))
            assert (r.status, r.output, r.gas_used, r.op_seq) == (Status.SUCCESS, b"\x0a", 7, ("PUSH1", "STOP"))
    finally:
        h.close()


def test_sleeping_stub_times_out(tmp_path):
    argv = _stub(tmp_path, "time.sleep(30)\n")
    h = BackendHandle.external("sleepy", argv)
    t0 = time.monotonic()
    r = h.run(b"\x00", b"", Limits(wall_limit=0.5))
    h.close()
    assert r.status is Status.BACKEND_CRASH and r.error == "wall-limit"
    assert time.monotonic() - t0 < 5


def test_invalid_hex_stub(tmp_path):
    argv = _stub(tmp_path, """
        print(json.dumps({"status": "Success", "output": "zz", "gas_used": 1, "op_seq": []}), flush=True)
    """)
    h = BackendHandle.external("bad", argv)
    r = h.run(b"\x00", b"", Limits(wall_limit=5))
    h.close()
    assert r.status is Status.BACKEND_CRASH and r.error.startswith("protocol:") and "hex" in r.error


def test_dying_stub(tmp_path):
    argv = _stub(tmp_path, "sys.exit(3)\n")
    h = BackendHandle.external("dead", argv)
    r = h.run(b"\x00", b"", Limits(wall_limit=5))
    h.close()
    assert r.status is Status.BACKEND_CRASH and "exited" in r.error


def test_missing_executable():
    h = BackendHandle.external("ghost", ["/nonexistent/adapter"])
    r = h.run(b"\x00", b"", Limits(wall_limit=1))
    assert r.status is Status.BACKEND_CRASH


def test_bundled_adapter_matches_builtin():
    code, cd = _add_call(40, 2)
    ext = [BackendHandle.external("ext-ref", adapter_argv("reference")),
           BackendHandle.external("ext-gas", adapter_argv("gas_variant"))]
    try:
        out = run_all(ext, code, cd, Limits(wall_limit=20))
    finally:
        for h in ext:
            h.close()
    local = BackendHandle.builtin("reference").run(code, cd, Limits())
    assert out[0].output == local.output == (42).to_bytes(32, "big")
    assert out[0].gas_used == local.gas_used and out[0].op_seq == local.op_seq


def test_response_decoding_rules():
    good = b'{"status": "Revert", "output": "", "gas_used": 3, "op_seq": ["REVERT"]}'
    assert decode_response(good, "b").status is Status.REVERT
    from contractdiff.harness import ProtocolError

    for bad in (b"nope", b"[]", b'{"status": "Weird", "output": "", "gas_used": 0, "op_seq": []}',
                b'{"status": "Success", "output": "", "gas_used": -1, "op_seq": []}',
                b'{"status": "Success", "output": "", "gas_used": 1}'):
        with pytest.raises(ProtocolError):
            decode_response(bad, "b")
    line = encode_request(b"\x01\x02", b"\xff", 5, 6)
    assert line.endswith(b"\n") and b'"bytecode":"0102"' in line
