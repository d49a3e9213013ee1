"""Text front end for differential polynomials.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' INT)?
    atom   := NUMBER | GEN MARKS | '(' expr ')'
    MARKS  := "'"* | '(' INT ')'

Generators are ``u1`` .. ``u9`` with aliases ``u`` = ``u1`` and ``v`` = ``u2``.
Division is only allowed by a nonzero constant.  Columns in error messages
are 1-based.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .diffalg import Poly, Var
from .errors import ExprSyntaxError, UnknownGenerator

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(')|(\S))")


@dataclass(frozen=True)
class Num:
    value: Fraction
    pos: int


@dataclass(frozen=True)
class Gen:
    var: Var
    pos: int


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "ExprAst"
    right: "ExprAst"
    pos: int


@dataclass(frozen=True)
class Neg:
    arg: "ExprAst"
    pos: int


@dataclass(frozen=True)
class Pow:
    base: "ExprAst"
    exp: int
    pos: int


ExprAst = Num | Gen | BinOp | Neg | Pow


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None or m.end() == i:
            break
        kind = ("int", "name", "mark", "op")[m.lastindex - 1]
        val = m.group(m.lastindex)
        toks.append((kind, val, m.start(m.lastindex) + 1))
        i = m.end()
    toks.append(("end", "", len(text) + 1))
    return toks


def default_resolver(ngens: int | None = None):
    """Map identifier -> Var for the u-generators (None when unknown)."""

    def resolve(name: str):
        if name == "u":
            idx = 1
        elif name == "v":
            idx = 2
        elif re.fullmatch(r"u[1-9]", name):
            idx = int(name[1:])
        else:
            return None
        if ngens is not None and idx > ngens:
            return None
        return Var("u", idx)

    return resolve


def z_resolver(names: list[str]):
    """Resolver for a plain polynomial algebra; also accepts z1, z2, ... by position."""
    table = {f"z{k + 1}": Var("z", k + 1) for k in range(len(names))}
    table.update({n: Var("z", k + 1) for k, n in enumerate(names)})
    return table.get


class _Parser:
    def __init__(self, text: str, resolve):
        self.toks = _tokenize(text)
        self.k = 0
        self.resolve = resolve

    def peek(self):
        return self.toks[self.k]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def fail(self, expected):
        kind, val, pos = self.peek()
        what = "end of input" if kind == "end" else f"unexpected {val!r}"
        raise ExprSyntaxError(what, pos, tuple(expected))

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = BinOp(op, node, self.term(), pos)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            node = BinOp(op, node, self.unary(), pos)
        return node

    def unary(self):
        kind, val, pos = self.peek()
        if kind == "op" and val in ("+", "-"):
            self.take()
            arg = self.unary()
            return Neg(arg, pos) if val == "-" else arg
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, val, p2 = self.peek()
            if kind != "int":
                self.fail(["integer exponent"])
            self.take()
            return Pow(base, int(val), pos)
        return base

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "int":
            self.take()
            return Num(Fraction(int(val)), pos)
        if kind == "name":
            self.take()
            var = self.resolve(val)
            if var is None:
                raise UnknownGenerator(val, pos)
            order = 0
            if self.peek() == ("op", "(", self.peek()[2]) and self.toks[self.k + 1][0] == "int":
                if self.toks[self.k + 2][:2] == ("op", ")"):
                    order = int(self.toks[self.k + 1][1])
                    self.k += 3
            while self.peek()[0] == "mark":
                self.take()
                order += 1
            if order and var.kind != "u":
                raise ExprSyntaxError("derivative of a non-differential variable", pos)
            return Gen(var._replace(order=order), pos)
        if kind == "op" and val == "(":
            self.take()
            node = self.expr()
            if self.peek()[:2] != ("op", ")"):
                self.fail(["')'"])
            self.take()
            return node
        self.fail(["number", "generator", "'('"])

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail(["operator", "end of input"])
        return node


def parse_ast(text: str, resolve=None) -> ExprAst:
    return _Parser(text, resolve or default_resolver()).parse()


def evaluate(node: ExprAst) -> Poly:
    if isinstance(node, Num):
        return Poly.const(node.value)
    if isinstance(node, Gen):
        return Poly.var(node.var)
    if isinstance(node, Neg):
        return -evaluate(node.arg)
    if isinstance(node, Pow):
        return evaluate(node.base) ** node.exp
    a, b = evaluate(node.left), evaluate(node.right)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if not b.is_const() or b.is_zero():
        raise ExprSyntaxError("division by a non-constant or zero", node.pos)
    return a / b.constant_term()


def parse_expr(text: str, ngens: int | None = None, resolve=None) -> Poly:
    """Parse text into a canonical Poly."""
    return evaluate(parse_ast(text, resolve or default_resolver(ngens)))
