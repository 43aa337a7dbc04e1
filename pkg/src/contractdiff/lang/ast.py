"""Syntax tree of the mini contract language.

Nodes are frozen dataclasses holding tuples, so trees are hashable values and
mutators build new trees instead of editing in place.  A *path* addresses a
node as a tuple of field names and list indices starting at the contract,
e.g. ``("functions", 0, "body", 2, "cond")``.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Any, Iterator, Optional, Tuple, Union

UINT256 = "uint256"
INT256 = "int256"
BOOL = "bool"
ADDRESS = "address"
BYTES32 = "bytes32"
BYTES = "bytes"

TYPE_TAGS = (UINT256, INT256, BOOL, ADDRESS, BYTES32, BYTES)
TYPE_ALIASES = {"uint": UINT256, "int": INT256}

VISIBILITIES = ("public", "private", "internal", "external")
MUTABILITIES = ("none", "constant", "view", "pure", "payable")

ARITH_OPS = ("+", "-", "*", "/", "%")
COMPARE_OPS = ("<", "<=", ">", ">=", "==", "!=")
LOGIC_OPS = ("&&", "||")
BINARY_OPS = ARITH_OPS + COMPARE_OPS + LOGIC_OPS
UNARY_OPS = ("-", "!")

CRITICAL_KINDS = ("new", "call", "delegatecall", "callcode", "send", "transfer")

WORD_MAX = 2**256 - 1
INT_MAX = 2**255 - 1
INT_MIN = -(2**255)
ADDRESS_MAX = 2**160 - 1


def literal_fits(tag: str, value: int) -> bool:
    """Range rule for a literal written directly into a variable of ``tag``."""
    if tag == INT256:
        return INT_MIN <= value <= INT_MAX
    if tag == BOOL:
        return value in (0, 1)
    if tag == ADDRESS:
        return 0 <= value <= ADDRESS_MAX
    return 0 <= value <= WORD_MAX


class Node:
    """Base for every syntax node."""

    def children(self) -> Iterator[Tuple[Tuple[Any, ...], "Node"]]:
        """Yield ``(relative_path, child)`` for direct child nodes."""
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Node):
                yield (f.name,), value
            elif isinstance(value, tuple):
                for i, item in enumerate(value):
                    if isinstance(item, Node):
                        yield (f.name, i), item


# -- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class Literal(Node):
    value: int
    is_bool: bool = False


@dataclass(frozen=True)
class VarRef(Node):
    name: str


@dataclass(frozen=True)
class Binary(Node):
    op: str
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Unary(Node):
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class CriticalCall(Node):
    """``receiver.kind(args)`` or ``new Contract(args)``.

    For ``new`` the receiver is ``None`` and ``contract`` names the type.
    """

    kind: str
    receiver: Optional["Expr"]
    args: Tuple["Expr", ...] = ()
    contract: Optional[str] = None


Expr = Union[Literal, VarRef, Binary, Unary, CriticalCall]


# -- statements --------------------------------------------------------------


@dataclass(frozen=True)
class VarDecl(Node):
    type: str
    name: str
    init: Optional[Expr] = None


@dataclass(frozen=True)
class Assign(Node):
    """``name = value`` or, with ``op`` set, ``name op= value``."""

    name: str
    value: Expr
    op: Optional[str] = None


@dataclass(frozen=True)
class If(Node):
    cond: Expr
    then: Tuple["Stmt", ...]
    orelse: Tuple["Stmt", ...] = ()


@dataclass(frozen=True)
class While(Node):
    cond: Expr
    body: Tuple["Stmt", ...]


@dataclass(frozen=True)
class For(Node):
    init: Optional[Union[VarDecl, Assign]]
    cond: Expr
    step: Optional[Assign]
    body: Tuple["Stmt", ...]


@dataclass(frozen=True)
class Assert(Node):
    cond: Expr


@dataclass(frozen=True)
class Return(Node):
    value: Optional[Expr] = None


@dataclass(frozen=True)
class Break(Node):
    pass


@dataclass(frozen=True)
class Continue(Node):
    pass


@dataclass(frozen=True)
class ExprStmt(Node):
    expr: CriticalCall


Stmt = Union[VarDecl, Assign, If, While, For, Assert, Return, Break, Continue, ExprStmt]
LOOPS = (While, For)


# -- declarations ------------------------------------------------------------


@dataclass(frozen=True)
class Param(Node):
    name: str
    type: str


@dataclass(frozen=True)
class FunctionDecl(Node):
    name: str
    params: Tuple[Param, ...] = ()
    visibility: str = "public"
    mutability: str = "none"
    returns: Optional[str] = None
    body: Tuple[Stmt, ...] = ()

    @property
    def signature(self) -> str:
        return f"{self.name}({','.join(p.type for p in self.params)})"


@dataclass(frozen=True)
class StateVar(Node):
    type: str
    name: str
    init: Optional[Expr] = None


@dataclass(frozen=True)
class ContractAst(Node):
    name: str
    state_vars: Tuple[StateVar, ...] = ()
    functions: Tuple[FunctionDecl, ...] = ()

    def function(self, name: str) -> FunctionDecl:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)


# -- traversal ---------------------------------------------------------------


def walk(node: Node, path: Tuple[Any, ...] = ()) -> Iterator[Tuple[Tuple[Any, ...], Node]]:
    """Pre-order walk yielding ``(path, node)`` pairs."""
    yield path, node
    for rel, child in node.children():
        yield from walk(child, path + rel)


def get_path(root: Node, path: Tuple[Any, ...]) -> Any:
    cur: Any = root
    for step in path:
        cur = cur[step] if isinstance(step, int) else getattr(cur, step)
    return cur


def set_path(root: Any, path: Tuple[Any, ...], value: Any) -> Any:
    """Return a copy of ``root`` with the value at ``path`` replaced."""
    if not path:
        return value
    head, rest = path[0], path[1:]
    if isinstance(head, int):
        items = list(root)
        items[head] = set_path(items[head], rest, value)
        return tuple(items)
    return replace(root, **{head: set_path(getattr(root, head), rest, value)})
