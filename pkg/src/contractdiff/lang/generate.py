"""Random valid contracts with arithmetic and bounded control flow.

Loops always terminate: ``for`` counters are never written by the body and
``while`` loops count down a dedicated variable that is decremented before
any ``continue`` can run.  Used for round-trip, CAST and compiler tests.
"""
from __future__ import annotations

import random
from typing import List, Sequence

from . import ast as A
from .validate import validate

INTERESTING = (0, 1, 2, 3, 7, 10, 255, 256, 2**128, 2**255, A.WORD_MAX, A.INT_MAX)
VALUE_TYPES = (A.UINT256, A.INT256, A.BOOL)


class _Gen:
    def __init__(self, rng: random.Random, max_depth: int, max_stmts: int):
        self.rng = rng
        self.max_depth = max_depth
        self.max_stmts = max_stmts
        self.counter = 0
        self.scopes: List[dict] = []
        self.frozen: set = set()  # loop counters the body must not assign
        self.state: dict = {}

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def names(self, writable: bool = False) -> List[str]:
        out = dict(self.state)
        for scope in self.scopes:
            out.update(scope)
        if writable:
            return sorted(n for n in out if n not in self.frozen)
        return sorted(out)

    def literal(self) -> A.Expr:
        r = self.rng
        if r.random() < 0.5:
            return A.Literal(r.randint(0, 20))
        return A.Literal(r.choice(INTERESTING))

    def expr(self, depth: int = 0) -> A.Expr:
        r = self.rng
        names = self.names()
        leaf = depth >= self.max_depth or r.random() < 0.3
        if leaf:
            if names and r.random() < 0.7:
                return A.VarRef(r.choice(names))
            return self.literal()
        roll = r.random()
        if roll < 0.55:
            return A.Binary(r.choice(A.ARITH_OPS), self.expr(depth + 1), self.expr(depth + 1))
        if roll < 0.8:
            return A.Binary(r.choice(A.COMPARE_OPS), self.expr(depth + 1), self.expr(depth + 1))
        if roll < 0.9:
            return A.Binary(r.choice(A.LOGIC_OPS), self.expr(depth + 1), self.expr(depth + 1))
        return A.Unary(r.choice(A.UNARY_OPS), self.expr(depth + 1))

    def block(self, budget: int, in_for: bool, returns: bool, depth: int) -> List[A.Stmt]:
        self.scopes.append({})
        out: List[A.Stmt] = []
        for _ in range(self.rng.randint(1, max(1, budget))):
            out.append(self.stmt(in_for, returns, depth))
        self.scopes.pop()
        return out

    def stmt(self, in_for: bool, returns: bool, depth: int) -> A.Stmt:
        r = self.rng
        roll = r.random()
        writable = self.names(writable=True)
        nested = depth < 2
        if roll < 0.25 or not writable:
            tag = r.choice(VALUE_TYPES)
            name = self.fresh("v")
            decl = A.VarDecl(tag, name, self.expr() if r.random() < 0.8 else None)
            self.scopes[-1][name] = tag
            return decl
        if roll < 0.5:
            op = r.choice((None, None) + A.ARITH_OPS)
            return A.Assign(r.choice(writable), self.expr(), op)
        if roll < 0.62 and nested:
            return A.If(
                self.expr(),
                tuple(self.block(2, in_for, returns, depth + 1)),
                tuple(self.block(2, in_for, returns, depth + 1)) if r.random() < 0.5 else (),
            )
        if roll < 0.72 and nested:
            counter = self.fresh("i")
            self.scopes.append({counter: A.UINT256})
            self.frozen.add(counter)
            body = self.block(2, True, returns, depth + 1)
            self.frozen.discard(counter)
            self.scopes.pop()
            return A.For(
                A.VarDecl(A.UINT256, counter, A.Literal(0)),
                A.Binary("<", A.VarRef(counter), A.Literal(r.randint(0, 4))),
                A.Assign(counter, A.Literal(1), "+"),
                tuple(body),
            )
        if roll < 0.78 and nested:
            # the countdown variable is declared in the enclosing block
            counter = self.fresh("w")
            self.frozen.add(counter)
            self.scopes[-1][counter] = A.UINT256
            body = self.block(2, False, returns, depth + 1)
            self.frozen.discard(counter)
            dec = A.Assign(counter, A.Literal(1), "-")
            loop = A.While(A.Binary(">", A.VarRef(counter), A.Literal(0)), (dec,) + tuple(body))
            return _Seq(A.VarDecl(A.UINT256, counter, A.Literal(r.randint(0, 3))), loop)
        if roll < 0.84:
            return A.Assert(self.expr())
        if roll < 0.9 and in_for:
            return A.Break() if r.random() < 0.5 else A.Continue()
        if roll < 0.95 and returns:
            return A.Return(self.expr())
        return A.Assign(r.choice(writable), self.expr(), r.choice((None,) + A.ARITH_OPS))


class _Seq:
    """Two statements that must appear consecutively."""

    def __init__(self, *stmts):
        self.stmts = stmts


def _flatten(stmts) -> tuple:
    out = []
    for s in stmts:
        if isinstance(s, _Seq):
            out.extend(_flatten(s.stmts))
        elif isinstance(s, A.If):
            out.append(A.If(s.cond, _flatten(s.then), _flatten(s.orelse)))
        elif isinstance(s, A.While):
            out.append(A.While(s.cond, _flatten(s.body)))
        elif isinstance(s, A.For):
            out.append(A.For(s.init, s.cond, s.step, _flatten(s.body)))
        else:
            out.append(s)
    return tuple(out)


def random_contract(
    rng: random.Random,
    n_functions: int = 1,
    max_depth: int = 3,
    max_stmts: int = 5,
    with_state: bool = True,
) -> A.ContractAst:
    """A random contract that passes :func:`validate` and always halts."""
    while True:
        tree = _attempt(rng, n_functions, max_depth, max_stmts, with_state)
        if not validate(tree):
            return tree


def _attempt(rng, n_functions, max_depth, max_stmts, with_state) -> A.ContractAst:
    g = _Gen(rng, max_depth, max_stmts)
    state_vars = []
    if with_state:
        for _ in range(rng.randint(0, 2)):
            tag = rng.choice((A.UINT256, A.INT256))
            name = g.fresh("s")
            state_vars.append(A.StateVar(tag, name, A.Literal(rng.randint(0, 9)) if rng.random() < 0.5 else None))
            g.state[name] = tag
    functions = []
    for k in range(n_functions):
        params = tuple(A.Param(g.fresh("p"), rng.choice(VALUE_TYPES)) for _ in range(rng.randint(0, 3)))
        ret = rng.choice(VALUE_TYPES) if rng.random() < 0.8 else None
        g.scopes = [{p.name: p.type for p in params}]
        body = list(g.block(max_stmts, False, ret is not None, 0))
        if ret is not None:
            body.append(A.Return(g.expr()))
        g.scopes = []
        functions.append(A.FunctionDecl(f"f{k}", params, "public", "none", ret, _flatten(body)))
    return A.ContractAst("Gen", tuple(state_vars), tuple(functions))


def random_contracts(seed: int, count: int, **kwargs) -> Sequence[A.ContractAst]:
    rng = random.Random(seed)
    return [random_contract(rng, **kwargs) for _ in range(count)]
