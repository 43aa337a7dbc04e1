"""Compile a contract to bytecode for the stack machine.

Layout: every parameter and local gets its own 32-byte memory slot starting
at 0x80; state variables live in storage slots numbered by declaration order.
The runtime starts with a prologue that writes nonzero state initializers,
then dispatches on the 4-byte selector to the public/external functions.
Unmatched selectors revert with empty data.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from ..abi import AbiSignature
from ..lang import ast as A
from .opcodes import OPCODES, push_width

MEM_BASE = 0x80
ADDRESS_MASK = A.ADDRESS_MAX


class CompileError(Exception):
    def __init__(self, reason: str, path: Tuple[Any, ...] = ()):
        self.reason, self.path = reason, path
        super().__init__(f"{reason} at {path}")


@dataclass(frozen=True)
class Var:
    tag: str
    storage: bool
    address: int


@dataclass(frozen=True)
class Compiled:
    code: bytes
    signature: AbiSignature

    @property
    def hex(self) -> str:
        return self.code.hex()


# sign-mask and magnitude: [x] -> [m, |x|], m = all ones when x < 0
_ABSMASK = ["PUSH1:0", "DUP2", "SLT", "PUSH1:0", "SUB", "DUP1", "SWAP2", "XOR", "DUP2", "SWAP1", "SUB"]
# [b, a] -> [a sdiv b]
_SDIV = _ABSMASK + ["SWAP2"] + _ABSMASK + ["SWAP2", "XOR", "SWAP2", "DIV", "DUP2", "XOR", "SUB"]
# [b, a] -> [a smod b]
_SMOD = _ABSMASK + ["SWAP2"] + _ABSMASK + [
    "SWAP1", "POP", "SWAP1", "SWAP2", "MOD", "DUP2", "XOR", "SUB",
]

_ARITH = {"+": "ADD", "-": "SUB", "*": "MUL", "/": "DIV", "%": "MOD"}


class _FunctionCompiler:
    def __init__(self, owner: "_Compiler", fn: A.FunctionDecl, fn_index: int):
        self.owner = owner
        self.fn = fn
        self.path = ("functions", fn_index)
        self.scopes: List[Dict[str, Var]] = [{}]
        self.loops: List[Tuple[int, int]] = []  # (continue label, break label)

    # helpers
    def emit(self, *items):
        self.owner.emit(*items)

    def declare(self, name: str, tag: str) -> Var:
        var = Var(tag, False, self.owner.next_slot())
        self.scopes[-1][name] = var
        return var

    def lookup(self, name: str, path) -> Var:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        if name in self.owner.state:
            return self.owner.state[name]
        raise CompileError(f"unresolved name {name!r}", path)

    def normalize(self, tag: str):
        if tag == A.BOOL:
            self.emit("ISZERO", "ISZERO")
        elif tag == A.ADDRESS:
            self.emit(("PUSH", ADDRESS_MASK), "AND")

    def store(self, var: Var):
        self.normalize(var.tag)
        self.emit(("PUSH", var.address), "SSTORE" if var.storage else "MSTORE")

    def load(self, var: Var):
        self.emit(("PUSH", var.address), "SLOAD" if var.storage else "MLOAD")

    def signed(self, e: A.Expr) -> bool:
        if isinstance(e, A.VarRef):
            for scope in reversed(self.scopes):
                if e.name in scope:
                    return scope[e.name].tag == A.INT256
            var = self.owner.state.get(e.name)
            return var is not None and var.tag == A.INT256
        if isinstance(e, A.Binary) and e.op in A.ARITH_OPS:
            return self.signed(e.lhs) or self.signed(e.rhs)
        if isinstance(e, A.Unary) and e.op == "-":
            return self.signed(e.operand)
        return False

    # function body
    def compile(self):
        fn = self.fn
        for i, p in enumerate(fn.params):
            var = self.declare(p.name, p.type)
            self.emit(("PUSH", 4 + 32 * i), "CALLDATALOAD")
            if p.type == A.BYTES:
                self.emit(("PUSH", 4), "ADD", "CALLDATALOAD")
            self.store(var)
        self.block(fn.body, self.path + ("body",))
        self.emit("STOP")

    def block(self, stmts, path):
        self.scopes.append({})
        for k, s in enumerate(stmts):
            self.stmt(s, path + (k,))
        self.scopes.pop()

    def stmt(self, s, path):
        o = self.owner
        if isinstance(s, A.VarDecl):
            if s.init is None:
                self.emit(("PUSH", 0))
            else:
                self.expr(s.init, path + ("init",))
            self.store(self.declare(s.name, s.type))
        elif isinstance(s, A.Assign):
            var = self.lookup(s.name, path)
            if s.op is None:
                self.expr(s.value, path + ("value",))
            else:
                self.binary(s.op, A.VarRef(s.name), s.value, path)
            self.store(var)
        elif isinstance(s, A.If):
            orelse, end = o.label(), o.label()
            self.expr(s.cond, path + ("cond",))
            self.emit("ISZERO", ("LABEL", orelse), "JUMPI")
            self.block(s.then, path + ("then",))
            if s.orelse:
                self.emit(("LABEL", end), "JUMP")
            self.emit(("DEST", orelse))
            if s.orelse:
                self.block(s.orelse, path + ("orelse",))
                self.emit(("DEST", end))
        elif isinstance(s, A.While):
            top, end = o.label(), o.label()
            self.emit(("DEST", top))
            self.expr(s.cond, path + ("cond",))
            self.emit("ISZERO", ("LABEL", end), "JUMPI")
            self.loops.append((top, end))
            self.block(s.body, path + ("body",))
            self.loops.pop()
            self.emit(("LABEL", top), "JUMP", ("DEST", end))
        elif isinstance(s, A.For):
            top, cont, end = o.label(), o.label(), o.label()
            self.scopes.append({})
            if s.init is not None:
                self.stmt(s.init, path + ("init",))
            self.emit(("DEST", top))
            self.expr(s.cond, path + ("cond",))
            self.emit("ISZERO", ("LABEL", end), "JUMPI")
            self.loops.append((cont, end))
            self.block(s.body, path + ("body",))
            self.loops.pop()
            self.emit(("DEST", cont))
            if s.step is not None:
                self.stmt(s.step, path + ("step",))
            self.emit(("LABEL", top), "JUMP", ("DEST", end))
            self.scopes.pop()
        elif isinstance(s, A.Assert):
            self.expr(s.cond, path + ("cond",))
            self.emit("ISZERO", ("LABEL", o.fail_label()), "JUMPI")
        elif isinstance(s, A.Return):
            if s.value is None:
                self.emit("STOP")
            else:
                self.expr(s.value, path + ("value",))
                self.emit(("PUSH", 0), "MSTORE", ("PUSH", 32), ("PUSH", 0), "RETURN")
        elif isinstance(s, (A.Break, A.Continue)):
            if not self.loops:
                raise CompileError(f"{type(s).__name__.lower()} outside loop", path)
            cont, end = self.loops[-1]
            self.emit(("LABEL", end if isinstance(s, A.Break) else cont), "JUMP")
        elif isinstance(s, A.ExprStmt):
            self.expr(s.expr, path + ("expr",))
            self.emit("POP")
        else:
            raise CompileError(f"unsupported statement {type(s).__name__}", path)

    def binary(self, op, lhs, rhs, path):
        o = self.owner
        if op in ("&&", "||"):
            skip = o.label()
            self.expr(lhs, path + ("lhs",))
            self.emit("DUP1")
            if op == "&&":
                self.emit("ISZERO")
            self.emit(("LABEL", skip), "JUMPI", "POP")
            self.expr(rhs, path + ("rhs",))
            self.emit(("DEST", skip), "ISZERO", "ISZERO")
            return
        self.expr(rhs, path + ("rhs",))
        self.expr(lhs, path + ("lhs",))
        signed = self.signed(lhs) or self.signed(rhs)
        if op in _ARITH:
            if signed and op == "/":
                self.emit(*_SDIV)
            elif signed and op == "%":
                self.emit(*_SMOD)
            else:
                self.emit(_ARITH[op])
        elif op in ("<", ">="):
            self.emit("SLT" if signed else "LT")
            if op == ">=":
                self.emit("ISZERO")
        elif op in (">", "<="):
            self.emit("SGT" if signed else "GT")
            if op == "<=":
                self.emit("ISZERO")
        elif op in ("==", "!="):
            self.emit("EQ")
            if op == "!=":
                self.emit("ISZERO")
        else:
            raise CompileError(f"unsupported operator {op!r}", path)

    def expr(self, e, path):
        if isinstance(e, A.Literal):
            self.emit(("PUSH", e.value))
        elif isinstance(e, A.VarRef):
            self.load(self.lookup(e.name, path))
        elif isinstance(e, A.Binary):
            self.binary(e.op, e.lhs, e.rhs, path)
        elif isinstance(e, A.Unary):
            self.expr(e.operand, path + ("operand",))
            if e.op == "!":
                self.emit("ISZERO")
            elif e.op == "-":
                self.emit(("PUSH", 0), "SUB")
            else:
                raise CompileError(f"unsupported unary {e.op!r}", path)
        elif isinstance(e, A.CriticalCall):
            # the stub call consumes (value, target); extra arguments are
            # evaluated for their effects and discarded
            takes_value = e.kind in ("send", "transfer") and e.args
            if takes_value:
                self.expr(e.args[0], path + ("args", 0))
            else:
                self.emit(("PUSH", 0))
            for k, arg in enumerate(e.args):
                if takes_value and k == 0:
                    continue
                self.expr(arg, path + ("args", k))
                self.emit("POP")
            if e.receiver is None:
                self.emit(("PUSH", 0))
            else:
                self.expr(e.receiver, path + ("receiver",))
                self.emit(("PUSH", ADDRESS_MASK), "AND")
            self.emit("CALL")
        else:
            raise CompileError(f"unsupported expression {type(e).__name__}", path)


class _Compiler:
    def __init__(self, tree: A.ContractAst):
        self.tree = tree
        self.items: List[Any] = []
        self._labels = itertools.count()
        self._slots = itertools.count()
        self._fail: Optional[int] = None
        self.state: Dict[str, Var] = {
            sv.name: Var(sv.type, True, i) for i, sv in enumerate(tree.state_vars)
        }

    def emit(self, *items):
        self.items.extend(items)

    def label(self) -> int:
        return next(self._labels)

    def next_slot(self) -> int:
        return MEM_BASE + 32 * next(self._slots)

    def fail_label(self) -> int:
        if self._fail is None:
            self._fail = self.label()
        return self._fail

    def run(self) -> bytes:
        tree = self.tree
        prologue = _FunctionCompiler(self, A.FunctionDecl("<init>"), -1)
        for i, sv in enumerate(tree.state_vars):
            if sv.init is None or (isinstance(sv.init, A.Literal) and sv.init.value == 0):
                continue
            prologue.expr(sv.init, ("state_vars", i, "init"))
            prologue.store(self.state[sv.name])
        entries = []
        self.emit(("PUSH", 1 << 224), ("PUSH", 0), "CALLDATALOAD", "DIV")
        for fn in tree.functions:
            if fn.visibility in ("public", "external"):
                entry = self.label()
                entries.append((fn, entry))
                sel = int.from_bytes(AbiSignature.of(fn).selector, "big")
                self.emit("DUP1", ("PUSH4", sel), "EQ", ("LABEL", entry), "JUMPI")
        self.emit(("PUSH", 0), ("PUSH", 0), "REVERT")
        labels = {f.name: lbl for f, lbl in entries}
        for i, fn in enumerate(tree.functions):
            # functions absent from the dispatcher are unreachable but still lowered
            entry = labels[fn.name] if fn.name in labels else self.label()
            self.emit(("DEST", entry), "POP")
            _FunctionCompiler(self, fn, i).compile()
        if self._fail is not None:
            self.emit(("DEST", self._fail), "INVALID")
        return self.assemble()

    def assemble(self) -> bytes:
        # every label reference is a PUSH2, so sizes are known in one pass
        offsets: Dict[int, int] = {}
        pc = 0
        for item in self.items:
            if isinstance(item, tuple):
                kind, value = item
                if kind == "DEST":
                    offsets[value] = pc
                    pc += 1
                elif kind == "LABEL":
                    pc += 3
                elif kind == "PUSH":
                    pc += 1 + _width(value)
                else:
                    pc += 1 + push_width(OPCODES[kind])
            elif item.startswith("PUSH1:"):
                pc += 2
            else:
                pc += 1
        if pc > 0xFFFF:
            raise CompileError("bytecode exceeds 64 KiB")
        out = bytearray()
        for item in self.items:
            if isinstance(item, tuple):
                kind, value = item
                if kind == "DEST":
                    out.append(OPCODES["JUMPDEST"])
                elif kind == "LABEL":
                    out.append(OPCODES["PUSH2"])
                    out += offsets[value].to_bytes(2, "big")
                elif kind == "PUSH":
                    w = _width(value)
                    out.append(OPCODES[f"PUSH{w}"])
                    out += value.to_bytes(w, "big")
                else:
                    w = push_width(OPCODES[kind])
                    out.append(OPCODES[kind])
                    out += value.to_bytes(w, "big")
            elif item.startswith("PUSH1:"):
                out.append(OPCODES["PUSH1"])
                out.append(int(item[6:]))
            else:
                out.append(OPCODES[item])
        return bytes(out)


def _width(value: int) -> int:
    return max(1, (value.bit_length() + 7) // 8)


def compile_contract(tree: A.ContractAst, function: Optional[str] = None) -> Compiled:
    """Compile ``tree``; ``function`` picks the signature returned with the code.

    Without ``function`` the first public/external function is used, or the
    first function when none is callable.  A non-public target still
    compiles: its selector simply reverts.
    """
    if function is None:
        if not tree.functions:
            raise CompileError("contract has no functions")
        public = [f for f in tree.functions if f.visibility in ("public", "external")]
        fn = (public or tree.functions)[0]
    else:
        try:
            fn = tree.function(function)
        except KeyError:
            raise CompileError(f"no function {function!r}") from None
    code = _Compiler(tree).run()
    return Compiled(code, AbiSignature.of(fn))
