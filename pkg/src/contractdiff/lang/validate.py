"""Static well-formedness checks.  Violations are returned, never raised."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Tuple

from . import ast as A


@dataclass(frozen=True)
class Violation:
    path: Tuple[Any, ...]
    rule: str
    subject: str = ""


def terminates(stmts: Iterable[A.Stmt]) -> bool:
    """Conservative check that a statement list never falls through."""
    for s in stmts:
        if isinstance(s, A.Return):
            return True
        if isinstance(s, A.Assert) and isinstance(s.cond, A.Literal) and s.cond.value == 0:
            return True
        if isinstance(s, A.If) and terminates(s.then) and terminates(s.orelse):
            return True
    return False


class _Checker:
    def __init__(self, tree: A.ContractAst):
        self.tree = tree
        self.out: List[Violation] = []
        self.state: Dict[str, str] = {}

    def add(self, path, rule, subject=""):
        self.out.append(Violation(tuple(path), rule, subject))

    def run(self) -> List[Violation]:
        t = self.tree
        for i, sv in enumerate(t.state_vars):
            path = ("state_vars", i)
            self.check_type(path, sv.type)
            if sv.name in self.state:
                self.add(path, "duplicate-declaration", sv.name)
            self.state[sv.name] = sv.type
            if sv.init is not None:
                self.expr(sv.init, path + ("init",), [{}])
                self.check_literal(path, sv.type, sv.init, sv.name)
        seen = set()
        for i, fn in enumerate(t.functions):
            path = ("functions", i)
            if fn.name in seen:
                self.add(path, "duplicate-function", fn.name)
            seen.add(fn.name)
            self.function(fn, path)
        return self.out

    def check_type(self, path, tag):
        if tag not in A.TYPE_TAGS:
            self.add(path, "unknown-type", str(tag))

    def check_literal(self, path, tag, expr, name):
        value = None
        if isinstance(expr, A.Literal):
            value = expr.value
        elif isinstance(expr, A.Unary) and expr.op == "-" and isinstance(expr.operand, A.Literal):
            value = -expr.operand.value
        if value is not None and not A.literal_fits(tag, value):
            self.add(path, "literal-out-of-range", name)

    def function(self, fn: A.FunctionDecl, path):
        if fn.visibility not in A.VISIBILITIES:
            self.add(path, "unknown-visibility", fn.visibility)
        if fn.mutability not in A.MUTABILITIES:
            self.add(path, "unknown-mutability", fn.mutability)
        if fn.returns is not None:
            self.check_type(path, fn.returns)
        scope: Dict[str, str] = {}
        for j, p in enumerate(fn.params):
            self.check_type(path + ("params", j), p.type)
            if p.name in scope:
                self.add(path + ("params", j), "duplicate-declaration", p.name)
            scope[p.name] = p.type
        self.fn = fn
        self.block(fn.body, path + ("body",), [scope], 0)
        if fn.returns is not None and not terminates(fn.body):
            self.add(path, "missing-return", fn.name)

    def lookup(self, scopes, name):
        for scope in reversed(scopes):
            if name in scope:
                return scope[name]
        return self.state.get(name)

    def declare(self, scopes, path, tag, name):
        self.check_type(path, tag)
        if any(name in scope for scope in scopes):
            self.add(path, "duplicate-declaration", name)
        scopes[-1][name] = tag

    def block(self, stmts, path, scopes, loops):
        scopes = scopes + [{}]
        for k, s in enumerate(stmts):
            self.stmt(s, path + (k,), scopes, loops)

    def stmt(self, s, path, scopes, loops):
        if isinstance(s, A.VarDecl):
            if s.init is not None:
                self.expr(s.init, path + ("init",), scopes)
                self.check_literal(path, s.type, s.init, s.name)
            self.declare(scopes, path, s.type, s.name)
        elif isinstance(s, A.Assign):
            tag = self.lookup(scopes, s.name)
            if tag is None:
                self.add(path, "unresolved-name", s.name)
            if s.op is not None and s.op not in A.ARITH_OPS:
                self.add(path, "unknown-operator", s.op)
            self.expr(s.value, path + ("value",), scopes)
            if tag is not None and s.op is None:
                self.check_literal(path, tag, s.value, s.name)
        elif isinstance(s, A.If):
            self.expr(s.cond, path + ("cond",), scopes)
            self.block(s.then, path + ("then",), scopes, loops)
            self.block(s.orelse, path + ("orelse",), scopes, loops)
        elif isinstance(s, A.While):
            self.expr(s.cond, path + ("cond",), scopes)
            self.block(s.body, path + ("body",), scopes, loops + 1)
        elif isinstance(s, A.For):
            inner = scopes + [{}]
            if s.init is not None:
                if not isinstance(s.init, (A.VarDecl, A.Assign)):
                    self.add(path + ("init",), "bad-for-init")
                else:
                    self.stmt(s.init, path + ("init",), inner, loops)
            self.expr(s.cond, path + ("cond",), inner)
            if s.step is not None:
                if not isinstance(s.step, A.Assign):
                    self.add(path + ("step",), "bad-for-step")
                else:
                    self.stmt(s.step, path + ("step",), inner, loops)
            self.block(s.body, path + ("body",), inner, loops + 1)
        elif isinstance(s, A.Assert):
            self.expr(s.cond, path + ("cond",), scopes)
        elif isinstance(s, A.Return):
            if s.value is not None:
                self.expr(s.value, path + ("value",), scopes)
                if self.fn.returns is None:
                    self.add(path, "return-value-in-void-function", self.fn.name)
            elif self.fn.returns is not None:
                self.add(path, "missing-return-value", self.fn.name)
        elif isinstance(s, A.Break):
            if not loops:
                self.add(path, "break-outside-loop")
        elif isinstance(s, A.Continue):
            if not loops:
                self.add(path, "continue-outside-loop")
        elif isinstance(s, A.ExprStmt):
            if not isinstance(s.expr, A.CriticalCall):
                self.add(path, "bad-expression-statement")
            self.expr(s.expr, path + ("expr",), scopes)
        else:
            self.add(path, "unknown-statement", type(s).__name__)

    def expr(self, e, path, scopes):
        if isinstance(e, A.Literal):
            if not 0 <= e.value <= A.WORD_MAX or (e.is_bool and e.value not in (0, 1)):
                self.add(path, "literal-out-of-range", str(e.value))
        elif isinstance(e, A.VarRef):
            if self.lookup(scopes, e.name) is None:
                self.add(path, "unresolved-name", e.name)
        elif isinstance(e, A.Binary):
            if e.op not in A.BINARY_OPS:
                self.add(path, "unknown-operator", e.op)
            self.expr(e.lhs, path + ("lhs",), scopes)
            self.expr(e.rhs, path + ("rhs",), scopes)
        elif isinstance(e, A.Unary):
            if e.op not in A.UNARY_OPS:
                self.add(path, "unknown-operator", e.op)
            self.expr(e.operand, path + ("operand",), scopes)
        elif isinstance(e, A.CriticalCall):
            if e.kind not in A.CRITICAL_KINDS:
                self.add(path, "unknown-call-kind", e.kind)
            if (e.kind == "new") != (e.receiver is None):
                self.add(path, "bad-call-receiver", e.kind)
            if e.receiver is not None:
                self.expr(e.receiver, path + ("receiver",), scopes)
            for k, arg in enumerate(e.args):
                self.expr(arg, path + ("args", k), scopes)
        else:
            self.add(path, "unknown-expression", type(e).__name__)


def validate(tree: A.ContractAst) -> List[Violation]:
    """Return every rule violation in ``tree``; empty means well-formed."""
    return _Checker(tree).run()


def scope_at(tree: A.ContractAst, fn_index: int, block_path: Tuple[Any, ...], index: int) -> Dict[str, str]:
    """Names (with types) visible before statement ``index`` of the block at ``block_path``.

    ``block_path`` is relative to the function, e.g. ``("body",)`` or
    ``("body", 3, "then")``.  State variables are included.
    """
    fn = tree.functions[fn_index]
    visible: Dict[str, str] = {sv.name: sv.type for sv in tree.state_vars}
    visible.update({p.name: p.type for p in fn.params})
    node: Any = fn
    steps = list(block_path)
    k = 0
    while k < len(steps):
        field = steps[k]
        block = getattr(node, field)
        if k + 1 == len(steps):
            limit = index
        else:
            limit = steps[k + 1]
        for s in block[:limit]:
            if isinstance(s, A.VarDecl):
                visible[s.name] = s.type
        if k + 1 == len(steps):
            break
        node = block[steps[k + 1]]
        if isinstance(node, A.For) and isinstance(node.init, A.VarDecl):
            visible[node.init.name] = node.init.type
        k += 2
    return visible
