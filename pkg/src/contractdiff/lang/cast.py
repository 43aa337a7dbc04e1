"""Critical-location annotated trees.

A CAST mirrors the syntax tree node for node and marks every node that sits
in the subtree of a value-transfer construct (``new``, ``call``,
``delegatecall``, ``callcode``, ``send``, ``transfer``).  When such a call
is used as a statement, the statement node itself is the subtree root.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from functools import cached_property
from typing import Any, Dict, FrozenSet, Iterator, Tuple

from . import ast as A

Path = Tuple[Any, ...]


@dataclass(frozen=True)
class CastNode:
    node_type: type
    attrs: Tuple[Tuple[str, Any], ...]
    children: Tuple[Tuple[str, Any], ...]  # field -> CastNode | tuple of CastNode | None
    path: Path
    critical: bool


@dataclass(frozen=True)
class CastTree:
    root: CastNode
    source: A.ContractAst

    def nodes(self) -> Iterator[CastNode]:
        stack = [self.root]
        while stack:
            n = stack.pop()
            yield n
            for _, child in reversed(n.children):
                if isinstance(child, CastNode):
                    stack.append(child)
                elif isinstance(child, tuple):
                    stack.extend(reversed([c for c in child if isinstance(c, CastNode)]))

    @cached_property
    def critical_paths(self) -> FrozenSet[Path]:
        return frozenset(n.path for n in self.nodes() if n.critical)

    def is_critical(self, path: Path) -> bool:
        return path in self.critical_paths


def _is_critical_root(node: A.Node) -> bool:
    return isinstance(node, A.CriticalCall) or (
        isinstance(node, A.ExprStmt) and isinstance(node.expr, A.CriticalCall)
    )


def _annotate(node: A.Node, path: Path, inherited: bool) -> CastNode:
    critical = inherited or _is_critical_root(node)
    attrs = []
    children = []
    for f in fields(node):
        value = getattr(node, f.name)
        if isinstance(value, A.Node):
            children.append((f.name, _annotate(value, path + (f.name,), critical)))
        elif isinstance(value, tuple) and value and isinstance(value[0], A.Node):
            children.append(
                (f.name, tuple(_annotate(v, path + (f.name, i), critical) for i, v in enumerate(value)))
            )
        elif isinstance(value, tuple) and not value and f.name in _LIST_FIELDS:
            children.append((f.name, ()))
        else:
            attrs.append((f.name, value))
    return CastNode(type(node), tuple(attrs), tuple(children), path, critical)


_LIST_FIELDS = {"state_vars", "functions", "params", "body", "then", "orelse", "args"}


def build_cast(tree: A.ContractAst) -> CastTree:
    return CastTree(_annotate(tree, (), False), tree)


def erase(cast: CastTree | CastNode) -> A.Node:
    """Drop annotations and rebuild the plain syntax tree."""
    node = cast.root if isinstance(cast, CastTree) else cast
    kwargs: Dict[str, Any] = dict(node.attrs)
    for name, child in node.children:
        if isinstance(child, CastNode):
            kwargs[name] = erase(child)
        else:
            kwargs[name] = tuple(erase(c) for c in child)
    return node.node_type(**kwargs)
