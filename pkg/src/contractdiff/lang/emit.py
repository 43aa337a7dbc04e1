"""Source regeneration and the structured AST dump."""
from __future__ import annotations

import json
from dataclasses import fields
from typing import Any, List

from . import ast as A
from .parser import PRECEDENCE

INDENT = "    "


def emit_expr(e: A.Expr, parent_prec: int = 0, right: bool = False) -> str:
    if isinstance(e, A.Literal):
        if e.is_bool:
            return "true" if e.value else "false"
        return str(e.value)
    if isinstance(e, A.VarRef):
        return e.name
    if isinstance(e, A.Unary):
        inner = emit_expr(e.operand, 7)
        # keep "- -x" from lexing as "--x"
        sep = " " if e.op == "-" and inner.startswith("-") else ""
        text = f"{e.op}{sep}{inner}"
        return f"({text})" if parent_prec > 7 else text
    if isinstance(e, A.Binary):
        prec = PRECEDENCE[e.op]
        text = f"{emit_expr(e.lhs, prec)} {e.op} {emit_expr(e.rhs, prec, right=True)}"
        if prec < parent_prec or (right and prec == parent_prec):
            return f"({text})"
        return text
    if isinstance(e, A.CriticalCall):
        args = ", ".join(emit_expr(a) for a in e.args)
        if e.kind == "new":
            return f"new {e.contract}({args})"
        return f"{emit_expr(e.receiver, 8)}.{e.kind}({args})"
    raise TypeError(f"not an expression: {e!r}")


def _simple(s: A.Stmt) -> str:
    if isinstance(s, A.VarDecl):
        init = f" = {emit_expr(s.init)}" if s.init is not None else ""
        return f"{s.type} {s.name}{init}"
    if isinstance(s, A.Assign):
        return f"{s.name} {s.op or ''}= {emit_expr(s.value)}"
    raise TypeError(f"not a simple statement: {s!r}")


def _stmt(s: A.Stmt, depth: int, out: List[str]) -> None:
    pad = INDENT * depth
    if isinstance(s, (A.VarDecl, A.Assign)):
        out.append(f"{pad}{_simple(s)};")
    elif isinstance(s, A.If):
        out.append(f"{pad}if ({emit_expr(s.cond)}) {{")
        _block(s.then, depth + 1, out)
        if s.orelse:
            out.append(f"{pad}}} else {{")
            _block(s.orelse, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(s, A.While):
        out.append(f"{pad}while ({emit_expr(s.cond)}) {{")
        _block(s.body, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(s, A.For):
        init = _simple(s.init) if s.init is not None else ""
        step = _simple(s.step) if s.step is not None else ""
        out.append(f"{pad}for ({init}; {emit_expr(s.cond)}; {step}) {{")
        _block(s.body, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(s, A.Assert):
        out.append(f"{pad}assert({emit_expr(s.cond)});")
    elif isinstance(s, A.Return):
        out.append(f"{pad}return {emit_expr(s.value)};" if s.value is not None else f"{pad}return;")
    elif isinstance(s, A.Break):
        out.append(f"{pad}break;")
    elif isinstance(s, A.Continue):
        out.append(f"{pad}continue;")
    elif isinstance(s, A.ExprStmt):
        out.append(f"{pad}{emit_expr(s.expr)};")
    else:
        raise TypeError(f"not a statement: {s!r}")


def _block(stmts, depth, out):
    for s in stmts:
        _stmt(s, depth, out)


def emit_source(tree: A.ContractAst) -> str:
    out = [f"contract {tree.name} {{"]
    for sv in tree.state_vars:
        init = f" = {emit_expr(sv.init)}" if sv.init is not None else ""
        out.append(f"{INDENT}{sv.type} {sv.name}{init};")
    for fn in tree.functions:
        params = ", ".join(f"{p.type} {p.name}" for p in fn.params)
        attrs = [fn.visibility]
        if fn.mutability != "none":
            attrs.append(fn.mutability)
        if fn.returns is not None:
            attrs.append(f"returns ({fn.returns})")
        out.append(f"{INDENT}function {fn.name}({params}) {' '.join(attrs)} {{")
        _block(fn.body, 2, out)
        out.append(f"{INDENT}}}")
    out.append("}")
    return "\n".join(out) + "\n"


def to_data(node: Any) -> Any:
    """Plain-data form of a tree with a stable field order."""
    if isinstance(node, A.Node):
        data = {"node": type(node).__name__}
        for f in fields(node):
            data[f.name] = to_data(getattr(node, f.name))
        return data
    if isinstance(node, tuple):
        return [to_data(x) for x in node]
    return node


def dump(tree: A.Node) -> str:
    """Deterministic text serialization used by golden tests."""
    return json.dumps(to_data(tree), indent=1)
