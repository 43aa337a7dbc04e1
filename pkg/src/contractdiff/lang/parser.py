"""Recursive-descent parser for ``.msol`` sources."""
from __future__ import annotations

import re
from typing import List, NamedTuple, Optional, Tuple

from . import ast as A


class ParseError(Exception):
    """Base class for frontend errors."""


class ContractSyntaxError(ParseError):
    def __init__(self, line: int, col: int, expected: str, found: str):
        self.line, self.col, self.expected, self.found = line, col, expected, found
        super().__init__(f"{line}:{col}: expected {expected}, found {found!r}")


class ContractTypeError(ParseError):
    def __init__(self, identifier: str, reason: str):
        self.identifier, self.reason = identifier, reason
        super().__init__(f"{identifier}: {reason}")


class Token(NamedTuple):
    kind: str  # ident, number, op, eof
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<number>0[xX][0-9a-fA-F]+|[0-9]+)
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<op>\+\+|--|\+=|-=|\*=|/=|%=|==|!=|<=|>=|&&|\|\||[-+*/%<>=!(){};,.^~])
    """,
    re.VERBOSE | re.DOTALL,
)

KEYWORDS = {
    "contract", "function", "returns", "return", "if", "else", "while", "for",
    "assert", "break", "continue", "true", "false", "new", "pragma",
}


def tokenize(source: str) -> List[Token]:
    tokens: List[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ContractSyntaxError(line, pos - line_start + 1, "token", source[pos])
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, pos - line_start + 1))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# binding power of binary operators; higher binds tighter
PRECEDENCE = {
    "||": 1, "&&": 2, "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5, "*": 6, "/": 6, "%": 6,
}

_ASSIGN_OPS = {"=": None, "+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%"}


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def fail(self, expected: str) -> ContractSyntaxError:
        t = self.tok
        return ContractSyntaxError(t.line, t.col, expected, t.text or "<eof>")

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "ident")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.fail(repr(text))
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.fail("identifier")
        self.i += 1
        return t.text

    def type_name(self) -> Optional[str]:
        t = self.tok
        if t.kind != "ident":
            return None
        tag = A.TYPE_ALIASES.get(t.text, t.text)
        return tag if tag in A.TYPE_TAGS else None

    def expect_type(self) -> str:
        tag = self.type_name()
        if tag is None:
            raise self.fail("type name")
        self.i += 1
        return tag

    # -- top level
    def contract(self) -> A.ContractAst:
        while self.at("pragma"):
            while not self.at(";"):
                if self.tok.kind == "eof":
                    raise self.fail("';'")
                self.i += 1
            self.i += 1
        self.expect("contract")
        name = self.ident()
        self.expect("{")
        state_vars: List[A.StateVar] = []
        functions: List[A.FunctionDecl] = []
        while not self.accept("}"):
            if self.at("function"):
                functions.append(self.function())
            elif self.type_name() is not None:
                tag = self.expect_type()
                var = self.ident()
                init = self.expression() if self.accept("=") else None
                self.expect(";")
                state_vars.append(A.StateVar(tag, var, init))
            else:
                raise self.fail("state variable or function")
        if self.tok.kind != "eof":
            raise self.fail("end of input")
        return A.ContractAst(name, tuple(state_vars), tuple(functions))

    def function(self) -> A.FunctionDecl:
        self.expect("function")
        name = self.ident()
        self.expect("(")
        params: List[A.Param] = []
        if not self.at(")"):
            while True:
                tag = self.expect_type()
                params.append(A.Param(self.ident(), tag))
                if not self.accept(","):
                    break
        self.expect(")")
        visibility, mutability, returns = None, None, None
        while True:
            t = self.tok.text
            if t in A.VISIBILITIES and visibility is None:
                visibility = t
            elif t in A.MUTABILITIES and t != "none" and mutability is None:
                mutability = t
            elif t == "returns" and returns is None:
                self.i += 1
                self.expect("(")
                returns = self.expect_type()
                if self.tok.kind == "ident" and self.tok.text not in KEYWORDS:
                    self.i += 1  # named return value, ignored
                self.expect(")")
                continue
            else:
                break
            self.i += 1
        body = self.block()
        return A.FunctionDecl(
            name, tuple(params), visibility or "public", mutability or "none", returns, body
        )

    def block(self) -> Tuple[A.Stmt, ...]:
        self.expect("{")
        stmts: List[A.Stmt] = []
        while not self.accept("}"):
            if self.tok.kind == "eof":
                raise self.fail("'}'")
            stmts.append(self.statement())
        return tuple(stmts)

    def body(self) -> Tuple[A.Stmt, ...]:
        if self.at("{"):
            return self.block()
        return (self.statement(),)

    # -- statements
    def statement(self) -> A.Stmt:
        t = self.tok
        if t.text == "if":
            self.i += 1
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            then = self.body()
            orelse: Tuple[A.Stmt, ...] = ()
            if self.accept("else"):
                orelse = self.body()
            return A.If(cond, then, orelse)
        if t.text == "while":
            self.i += 1
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            return A.While(cond, self.body())
        if t.text == "for":
            self.i += 1
            self.expect("(")
            init = None
            if not self.at(";"):
                init = self.var_decl() if self.type_name() is not None else self.assignment()
            self.expect(";")
            cond = self.expression()
            self.expect(";")
            step = None if self.at(")") else self.assignment()
            self.expect(")")
            return A.For(init, cond, step, self.body())
        if t.text == "assert":
            self.i += 1
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            self.expect(";")
            return A.Assert(cond)
        if t.text == "return":
            self.i += 1
            value = None if self.at(";") else self.expression()
            self.expect(";")
            return A.Return(value)
        if t.text == "break":
            self.i += 1
            self.expect(";")
            return A.Break()
        if t.text == "continue":
            self.i += 1
            self.expect(";")
            return A.Continue()
        if self.type_name() is not None:
            decl = self.var_decl()
            self.expect(";")
            return decl
        if t.text in ("++", "--") or (t.kind == "ident" and self.peek().text in (*_ASSIGN_OPS, "++", "--")):
            stmt = self.assignment()
            self.expect(";")
            return stmt
        expr = self.expression()
        if not isinstance(expr, A.CriticalCall):
            raise ContractSyntaxError(t.line, t.col, "statement", t.text)
        self.expect(";")
        return A.ExprStmt(expr)

    def var_decl(self) -> A.VarDecl:
        tag = self.expect_type()
        name = self.ident()
        init = self.expression() if self.accept("=") else None
        return A.VarDecl(tag, name, init)

    def assignment(self) -> A.Assign:
        if self.at("++") or self.at("--"):
            op = "+" if self.tok.text == "++" else "-"
            self.i += 1
            return A.Assign(self.ident(), A.Literal(1), op)
        name = self.ident()
        if self.at("++") or self.at("--"):
            op = "+" if self.tok.text == "++" else "-"
            self.i += 1
            return A.Assign(name, A.Literal(1), op)
        t = self.tok
        if t.text not in _ASSIGN_OPS:
            raise self.fail("assignment operator")
        self.i += 1
        return A.Assign(name, self.expression(), _ASSIGN_OPS[t.text])

    # -- expressions
    def expression(self, min_prec: int = 1) -> A.Expr:
        lhs = self.unary()
        while True:
            op = self.tok.text
            prec = PRECEDENCE.get(op) if self.tok.kind == "op" else None
            if prec is None or prec < min_prec:
                return lhs
            self.i += 1
            rhs = self.expression(prec + 1)
            lhs = A.Binary(op, lhs, rhs)

    def unary(self) -> A.Expr:
        if self.tok.kind == "op" and self.tok.text in A.UNARY_OPS:
            op = self.tok.text
            self.i += 1
            return A.Unary(op, self.unary())
        return self.postfix()

    def postfix(self) -> A.Expr:
        t = self.tok
        if t.text == "new":
            self.i += 1
            contract = self.ident()
            return A.CriticalCall("new", None, self.call_args(), contract)
        expr = self.primary()
        while self.at("."):
            self.i += 1
            member = self.tok
            if member.text not in A.CRITICAL_KINDS or member.text == "new":
                raise self.fail("call, delegatecall, callcode, send or transfer")
            self.i += 1
            expr = A.CriticalCall(member.text, expr, self.call_args())
        return expr

    def call_args(self) -> Tuple[A.Expr, ...]:
        self.expect("(")
        args: List[A.Expr] = []
        if not self.at(")"):
            while True:
                args.append(self.expression())
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(args)

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind == "number":
            self.i += 1
            value = int(t.text, 0)
            if value > A.WORD_MAX:
                raise ContractTypeError(t.text, "integer literal exceeds 256 bits")
            return A.Literal(value)
        if t.text in ("true", "false"):
            self.i += 1
            return A.Literal(int(t.text == "true"), is_bool=True)
        if t.text == "(":
            self.i += 1
            expr = self.expression()
            self.expect(")")
            return expr
        if t.kind == "ident":
            return A.VarRef(self.ident())
        raise self.fail("expression")


def parse(source: str, check: bool = True) -> A.ContractAst:
    """Parse source text into a :class:`ContractAst`.

    With ``check`` (the default) the tree is validated and the first
    violation is raised as :class:`ContractTypeError`.
    """
    tree = Parser(source).contract()
    if check:
        from .validate import validate

        problems = validate(tree)
        if problems:
            v = problems[0]
            raise ContractTypeError(v.subject, v.rule)
    return tree
