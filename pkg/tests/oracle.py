"""Tree-walking reference semantics for the contract language.

Written from the language rules, not from the compiler: values are 256-bit
words, arithmetic wraps, division by zero yields zero, an expression is
signed when it mentions an int256 variable, stores coerce bool/address.
"""
from __future__ import annotations

from contractdiff.lang import ast as A

W = 2**256
M = W - 1
ADDR = 2**160 - 1


class AssertFailed(Exception):
    pass


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


def to_signed(x):
    return x - W if x >= 2**255 else x


def coerce(tag, v):
    v %= W
    if tag == "bool":
        return 1 if v else 0
    if tag == "address":
        return v & ADDR
    return v


class Interp:
    def __init__(self, tree):
        self.tree = tree
        self.storage = {}
        self.state_types = {sv.name: sv.type for sv in tree.state_vars}
        for sv in tree.state_vars:
            self.storage[sv.name] = coerce(sv.type, self.ev(sv.init, [])) if sv.init is not None else 0

    # variable environment: list of dict name -> [type, value]
    def find(self, env, name):
        for scope in reversed(env):
            if name in scope:
                return scope[name]
        return None

    def read(self, env, name):
        cell = self.find(env, name)
        return cell[1] if cell is not None else self.storage[name]

    def tag(self, env, name):
        cell = self.find(env, name)
        return cell[0] if cell is not None else self.state_types[name]

    def write(self, env, name, v):
        cell = self.find(env, name)
        if cell is not None:
            cell[1] = coerce(cell[0], v)
        else:
            self.storage[name] = coerce(self.state_types[name], v)

    def is_signed(self, e, env):
        if isinstance(e, A.VarRef):
            return self.tag(env, e.name) == "int256"
        if isinstance(e, A.Binary) and e.op in ("+", "-", "*", "/", "%"):
            return self.is_signed(e.lhs, env) or self.is_signed(e.rhs, env)
        if isinstance(e, A.Unary) and e.op == "-":
            return self.is_signed(e.operand, env)
        return False

    def arith(self, op, a, b, signed):
        if op == "+":
            return (a + b) % W
        if op == "-":
            return (a - b) % W
        if op == "*":
            return (a * b) % W
        if b == 0:
            return 0
        if not signed:
            return a // b if op == "/" else a % b
        sa, sb = to_signed(a), to_signed(b)
        q = abs(sa) // abs(sb)
        if op == "/":
            return (q if (sa < 0) == (sb < 0) else -q) % W
        r = abs(sa) % abs(sb)
        return (-r if sa < 0 else r) % W

    def ev(self, e, env):
        if isinstance(e, A.Literal):
            return e.value % W
        if isinstance(e, A.VarRef):
            return self.read(env, e.name)
        if isinstance(e, A.Unary):
            v = self.ev(e.operand, env)
            return int(v == 0) if e.op == "!" else (-v) % W
        if isinstance(e, A.CriticalCall):
            for a in e.args:
                self.ev(a, env)
            if e.receiver is not None:
                self.ev(e.receiver, env)
            return 1
        op = e.op
        if op == "&&":
            return int(self.ev(e.lhs, env) != 0 and self.ev(e.rhs, env) != 0)
        if op == "||":
            return int(self.ev(e.lhs, env) != 0 or self.ev(e.rhs, env) != 0)
        a, b = self.ev(e.lhs, env), self.ev(e.rhs, env)
        signed = self.is_signed(e.lhs, env) or self.is_signed(e.rhs, env)
        if op in ("+", "-", "*", "/", "%"):
            return self.arith(op, a, b, signed)
        if signed:
            a, b = to_signed(a), to_signed(b)
        return int({"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b, "==": a == b, "!=": a != b}[op])

    def block(self, stmts, env):
        env.append({})
        try:
            for s in stmts:
                self.st(s, env)
        finally:
            env.pop()

    def st(self, s, env):
        if isinstance(s, A.VarDecl):
            v = self.ev(s.init, env) if s.init is not None else 0
            env[-1][s.name] = [s.type, coerce(s.type, v)]
        elif isinstance(s, A.Assign):
            if s.op is None:
                v = self.ev(s.value, env)
            else:
                v = self.ev(A.Binary(s.op, A.VarRef(s.name), s.value), env)
            self.write(env, s.name, v)
        elif isinstance(s, A.If):
            if self.ev(s.cond, env):
                self.block(s.then, env)
            else:
                self.block(s.orelse, env)
        elif isinstance(s, A.While):
            while self.ev(s.cond, env):
                try:
                    self.block(s.body, env)
                except _Break:
                    break
                except _Continue:
                    continue
        elif isinstance(s, A.For):
            env.append({})
            try:
                if s.init is not None:
                    self.st(s.init, env)
                while self.ev(s.cond, env):
                    try:
                        self.block(s.body, env)
                    except _Break:
                        break
                    except _Continue:
                        pass
                    if s.step is not None:
                        self.st(s.step, env)
            finally:
                env.pop()
        elif isinstance(s, A.Assert):
            if not self.ev(s.cond, env):
                raise AssertFailed()
        elif isinstance(s, A.Return):
            raise _Return(None if s.value is None else self.ev(s.value, env))
        elif isinstance(s, A.Break):
            raise _Break()
        elif isinstance(s, A.Continue):
            raise _Continue()
        elif isinstance(s, A.ExprStmt):
            self.ev(s.expr, env)
        else:
            raise TypeError(s)


def run(tree, fn_name, words):
    """Call ``fn_name`` with raw 32-byte argument words.

    Returns ``("Success", output)`` or ``("VmError", None)`` on assert failure.
    """
    it = Interp(tree)
    fn = tree.function(fn_name)
    env = [{p.name: [p.type, coerce(p.type, w)] for p, w in zip(fn.params, words)}]
    try:
        it.block(fn.body, env)
    except _Return as r:
        if r.value is None:
            return "Success", b""
        return "Success", r.value.to_bytes(32, "big")
    except AssertFailed:
        return "VmError", None
    return "Success", b""
