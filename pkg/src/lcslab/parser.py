"""A small arithmetic-expression language for declaring fields in text/JSON.

Grammar: float literals, identifiers (chart coordinates or named parameters),
``+ - * /``, integer powers via ``^``, unary minus, parentheses, and the
function set sqrt, exp, log, sin, cos, atan2.  Errors carry the offending
position in the source string.
"""

from __future__ import annotations

import re
from typing import Sequence

from . import dual
from .charts import Chart
from .errors import ParseError
from .forms import ScalarField

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)

_FUNCTIONS = {
    "sqrt": (1, dual.sqrt),
    "exp": (1, dual.exp),
    "log": (1, dual.log),
    "sin": (1, dual.sin),
    "cos": (1, dual.cos),
    "atan2": (2, dual.atan2),
}


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            stripped = text[pos:]
            bad = pos + (len(stripped) - len(stripped.lstrip()))
            if bad >= len(text):
                break
            raise ParseError(f"unexpected character {text[bad]!r}", bad, text)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.peek()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", pos, self.text)
        return self.advance()

    # expr := term (('+'|'-') term)*
    def expr(self):
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                rhs = self.term()
                node = ("add" if val == "+" else "sub", node, rhs)
            else:
                return node

    # term := factor (('*'|'/') factor)*
    def term(self):
        node = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                rhs = self.factor()
                node = ("mul" if val == "*" else "div", node, rhs)
            else:
                return node

    # factor := '-' factor | power
    def factor(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return ("neg", self.factor())
        return self.power()

    # power := atom ('^' integer)*
    def power(self):
        node = self.atom()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "^":
                self.advance()
                node = ("pow", node, self.integer_exponent())
            else:
                return node

    def integer_exponent(self) -> int:
        sign = 1
        kind, val, pos = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            sign = -1
            kind, val, pos = self.peek()
        if kind != "num" or any(c in val for c in ".eE"):
            raise ParseError("exponent must be an integer literal", pos, self.text)
        self.advance()
        return sign * int(val)

    def atom(self):
        kind, val, pos = self.advance()
        if kind == "num":
            return ("const", float(val))
        if kind == "name":
            nkind, nval, _ = self.peek()
            if nkind == "op" and nval == "(":
                if val not in _FUNCTIONS:
                    raise ParseError(f"unknown function {val!r}", pos, self.text)
                arity, fn = _FUNCTIONS[val]
                self.advance()
                args = [self.expr()]
                while True:
                    k2, v2, p2 = self.peek()
                    if k2 == "op" and v2 == ",":
                        self.advance()
                        args.append(self.expr())
                    else:
                        break
                self.expect_op(")")
                if len(args) != arity:
                    raise ParseError(
                        f"{val} takes {arity} argument{'s' if arity > 1 else ''}, got {len(args)}",
                        pos,
                        self.text,
                    )
                return ("call", fn, args)
            return ("var", val, pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError("expected a number, name or parenthesised expression", pos, self.text)

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {val!r}", pos, self.text)
        return node


def _compile(node, binding):
    op = node[0]
    if op == "const":
        c = node[1]
        return lambda p: c
    if op == "var":
        return binding(node[1], node[2])
    if op == "neg":
        f = _compile(node[1], binding)
        return lambda p: -f(p)
    if op == "pow":
        f = _compile(node[1], binding)
        n = node[2]
        def pw(p, _f=f, _n=n):
            base = _f(p)
            if isinstance(base, dual.Dual):
                return base**_n
            return base**_n if _n >= 0 else 1.0 / base ** (-_n)
        return pw
    if op == "call":
        fn = node[1]
        args = [_compile(a, binding) for a in node[2]]
        if len(args) == 1:
            a0 = args[0]
            return lambda p: fn(a0(p))
        a0, a1 = args
        return lambda p: fn(a0(p), a1(p))
    lhs = _compile(node[1], binding)
    rhs = _compile(node[2], binding)
    if op == "add":
        return lambda p: lhs(p) + rhs(p)
    if op == "sub":
        return lambda p: lhs(p) - rhs(p)
    if op == "mul":
        return lambda p: lhs(p) * rhs(p)
    if op == "div":
        return lambda p: lhs(p) / rhs(p)
    raise AssertionError(f"unreachable node {op}")


def parse_field(expr: str, chart: Chart, params: dict[str, float] | None = None) -> ScalarField:
    """Parse ``expr`` into a scalar field on ``chart``.

    Identifiers resolve to chart coordinates first, then to entries of
    ``params``; anything else is an unknown-identifier parse error.
    """
    params = params or {}
    tree = _Parser(expr).parse()

    def binding(name: str, pos: int):
        if name in chart.coords:
            idx = chart.coords.index(name)
            return lambda p, _i=idx: p[_i]
        if name in params:
            c = float(params[name])
            return lambda p, _c=c: _c
        raise ParseError(f"unknown identifier {name!r}", pos, expr)

    fn = _compile(tree, binding)
    return ScalarField(chart, fn)


def parse_fields(exprs: Sequence[str], chart: Chart, params=None) -> list[ScalarField]:
    return [parse_field(e, chart, params) for e in exprs]
