"""The eight syntax-preserving mutators.

Mutators 1-4 rewrite every applicable site; mutators 5-8 rewrite one site
drawn at random, favouring sites that touch a critical location half of the
time.  Each returns a tree that passes :func:`validate`.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Sequence, Tuple

from ..lang import ast as A
from ..lang.cast import CastTree
from ..lang.validate import scope_at, validate

Path = Tuple[Any, ...]


class MutatorId(enum.IntEnum):
    LOCAL_VARIABLE = 1
    CONDITIONAL_OPERATOR = 2
    ARITHMETIC_OPERATOR = 3
    FUNCTION_PROPERTY = 4
    LOOP_OPERATOR = 5
    ASSERT_STATEMENT = 6
    RETURN_STATEMENT = 7
    CONTROL_STRUCTURE = 8


ALL_MUTATORS = tuple(MutatorId)


class NoApplicableSite(Exception):
    def __init__(self, mutator: int):
        self.mutator = MutatorId(mutator)
        super().__init__(f"no site for mutator {self.mutator.value} ({self.mutator.name.lower()})")


@dataclass(frozen=True)
class MutationOutcome:
    mutated: A.ContractAst
    applied: Tuple[MutatorId, ...]
    sites: Tuple[Path, ...]


NEGATE = {"<": ">=", ">=": "<", ">": "<=", "<=": ">", "==": "!=", "!=": "=="}
LOOP_BOUND_DELTA = 99


def _pick_site(cast: CastTree, sites: Sequence[Path], rng: random.Random) -> Path:
    critical = cast.critical_paths
    touching = [s for s in sites if any(p[: len(s)] == s or s[: len(p)] == p for p in critical)]
    if touching and rng.random() < 0.5:
        return rng.choice(touching)
    return rng.choice(list(sites))


def _blocks(tree: A.ContractAst) -> List[Tuple[int, Path]]:
    """Every statement list as ``(function index, path relative to the function)``."""
    out = []
    for i, fn in enumerate(tree.functions):
        out.append((i, ("body",)))
        for path, node in A.walk(fn, ()):
            if isinstance(node, A.If):
                out.append((i, path + ("then",)))
                out.append((i, path + ("orelse",)))
            elif isinstance(node, A.LOOPS):
                out.append((i, path + ("body",)))
    return out


def _in_functions(tree: A.ContractAst):
    for path, node in A.walk(tree):
        if path[:1] == ("functions",):
            yield path, node


# -- 1: local variable type ---------------------------------------------------


def _local_variable(tree, cast, rng):
    sites = [p for p, n in _in_functions(tree) if isinstance(n, A.VarDecl)]
    if not sites:
        raise NoApplicableSite(1)
    changed = []
    for site in sites:
        decl = A.get_path(tree, site)
        options = [t for t in A.TYPE_TAGS if t != decl.type]
        rng.shuffle(options)
        for tag in options:
            candidate = A.set_path(tree, site, replace(decl, type=tag))
            if not validate(candidate):
                tree = candidate
                changed.append(site)
                break
    if not changed:
        raise NoApplicableSite(1)
    return tree, changed


# -- 2: conditional operators -------------------------------------------------


def _conditional_operator(tree, cast, rng):
    sites = [p for p, n in A.walk(tree) if isinstance(n, A.Binary) and n.op in NEGATE]
    if not sites:
        raise NoApplicableSite(2)
    for site in sites:
        node = A.get_path(tree, site)
        tree = A.set_path(tree, site, replace(node, op=NEGATE[node.op]))
    return tree, sites


# -- 3: arithmetic operators --------------------------------------------------


def _arithmetic_operator(tree, cast, rng):
    sites = [
        p for p, n in A.walk(tree)
        if (isinstance(n, A.Binary) and n.op in A.ARITH_OPS) or (isinstance(n, A.Assign) and n.op is not None)
    ]
    if not sites:
        raise NoApplicableSite(3)
    for site in sites:
        node = A.get_path(tree, site)
        new_op = rng.choice([op for op in A.ARITH_OPS if op != node.op])
        tree = A.set_path(tree, site, replace(node, op=new_op))
    return tree, sites


# -- 4: function attributes ---------------------------------------------------


def _function_property(tree, cast, rng):
    if not tree.functions:
        raise NoApplicableSite(4)
    sites = []
    for i, fn in enumerate(tree.functions):
        if rng.random() < 0.5:
            fn = replace(fn, visibility=rng.choice([v for v in A.VISIBILITIES if v != fn.visibility]))
        elif fn.mutability == "none":
            fn = replace(fn, mutability=rng.choice(A.MUTABILITIES[1:]))  # insert
        elif rng.random() < 0.5:
            fn = replace(fn, mutability="none")  # delete
        else:
            others = [m for m in A.MUTABILITIES[1:] if m != fn.mutability]
            fn = replace(fn, mutability=rng.choice(others))  # modify
        tree = A.set_path(tree, ("functions", i), fn)
        sites.append(("functions", i))
    return tree, sites


# -- 5: loop bound ------------------------------------------------------------


def _bump(value: int) -> int:
    bumped = value + LOOP_BOUND_DELTA
    return bumped if bumped <= A.WORD_MAX else value - LOOP_BOUND_DELTA


def _loop_operator(tree, cast, rng):
    sites = [
        p for p, n in A.walk(tree)
        if isinstance(n, A.LOOPS) and isinstance(n.cond, A.Binary) and n.cond.op in NEGATE
    ]
    if not sites:
        raise NoApplicableSite(5)
    site = _pick_site(cast, sites, rng)
    cond = A.get_path(tree, site).cond
    if isinstance(cond.rhs, A.Literal) and not cond.rhs.is_bool:
        cond = replace(cond, rhs=replace(cond.rhs, value=_bump(cond.rhs.value)))
    elif isinstance(cond.lhs, A.Literal) and not cond.lhs.is_bool:
        cond = replace(cond, lhs=replace(cond.lhs, value=_bump(cond.lhs.value)))
    else:
        cond = replace(cond, rhs=A.Binary("+", cond.rhs, A.Literal(LOOP_BOUND_DELTA)))
    return A.set_path(tree, site + ("cond",), cond), [site + ("cond",)]


# -- 6: assert insert / delete ------------------------------------------------


def _delete_at(tree, path: Path):
    block = A.get_path(tree, path[:-1])
    idx = path[-1]
    return A.set_path(tree, path[:-1], block[:idx] + block[idx + 1 :])


def _assert_statement(tree, cast, rng):
    existing = [p for p, n in _in_functions(tree) if isinstance(n, A.Assert)]
    if existing and rng.random() < 0.5:
        rng.shuffle(existing)
        for site in existing:
            candidate = _delete_at(tree, site)
            if not validate(candidate):
                return candidate, [site]
    blocks = _blocks(tree)
    if not blocks:
        raise NoApplicableSite(6)
    fn_index, rel = rng.choice(blocks)
    base = ("functions", fn_index)
    block = A.get_path(tree, base + rel)
    index = rng.randint(0, len(block))
    names = sorted(scope_at(tree, fn_index, rel, index))
    op = rng.choice(sorted(NEGATE))
    if len(names) >= 2:
        a, b = rng.sample(names, 2)
        cond: A.Expr = A.Binary(op, A.VarRef(a), A.VarRef(b))
    elif names:
        cond = A.Binary(op, A.VarRef(names[0]), A.Literal(0))
    else:
        cond = A.Literal(1, is_bool=True)
    new_block = block[:index] + (A.Assert(cond),) + block[index:]
    return A.set_path(tree, base + rel, new_block), [base + rel]


# -- 7: return statement ------------------------------------------------------


def _return_statement(tree, cast, rng):
    sites = [("functions", i) for i, fn in enumerate(tree.functions) if fn.returns is not None]
    if not sites:
        raise NoApplicableSite(7)
    site = _pick_site(cast, sites, rng)
    fn = A.get_path(tree, site)
    returns = [p for p, n in A.walk(fn) if isinstance(n, A.Return) and n.value is not None]
    fn = replace(fn, returns=None)
    if returns:
        doomed = rng.choice(returns)
        for p in returns:
            if p != doomed:
                fn = A.set_path(fn, p, A.Return(None))
        fn = _delete_at(fn, doomed)
    return A.set_path(tree, site, fn), [site]


# -- 8: break / continue ------------------------------------------------------


def _control_structure(tree, cast, rng):
    sites = [p for p, n in A.walk(tree) if isinstance(n, A.LOOPS)]
    if not sites:
        raise NoApplicableSite(8)
    site = _pick_site(cast, sites, rng)
    loop = A.get_path(tree, site)
    index = rng.randint(0, len(loop.body))
    stmt = A.Break() if rng.random() < 0.5 else A.Continue()
    loop = replace(loop, body=loop.body[:index] + (stmt,) + loop.body[index:])
    return A.set_path(tree, site, loop), [site]


_MUTATORS: Dict[MutatorId, Callable] = {
    MutatorId.LOCAL_VARIABLE: _local_variable,
    MutatorId.CONDITIONAL_OPERATOR: _conditional_operator,
    MutatorId.ARITHMETIC_OPERATOR: _arithmetic_operator,
    MutatorId.FUNCTION_PROPERTY: _function_property,
    MutatorId.LOOP_OPERATOR: _loop_operator,
    MutatorId.ASSERT_STATEMENT: _assert_statement,
    MutatorId.RETURN_STATEMENT: _return_statement,
    MutatorId.CONTROL_STRUCTURE: _control_structure,
}


def apply_mutator(cast: CastTree, m: int, rng: random.Random) -> MutationOutcome:
    """Apply mutator ``m`` to the contract behind ``cast``.

    Raises :class:`NoApplicableSite` when the contract lacks the construct.
    """
    m = MutatorId(m)
    tree, sites = _MUTATORS[m](cast.source, cast, rng)
    return MutationOutcome(tree, (m,), tuple(sites))
