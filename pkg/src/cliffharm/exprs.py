"""A tiny arithmetic expression language.

Used for boundary data on the command line, for the ``eval`` sublanguages and
for the multivector text form. Expressions are parsed once into a nested-tuple
tree and evaluated against a namespace; evaluation goes through the ordinary
Python operators, so numpy arrays, complex numbers, multivectors and
quaternions all work as values.

Grammar (lowest to highest precedence)::

    expr   := sum ('@' sum)*
    sum    := prod (('+' | '-') prod)*
    prod   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' args ')' | '(' expr ')' | '{' args '}'
"""

from __future__ import annotations

import operator
import re
from typing import Any, Callable, Mapping

import numpy as np

from .errors import ParseError

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?j?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*(?:\{[0-9,]*\})?)"
    r"|(?P<op>[-+*/^(){},@])"
    r")"
)

_BINARY = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "/": operator.truediv,
    "^": operator.pow,
    "@": operator.matmul,
}


def tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].strip()[:1]!r} at offset {pos}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None:
            raise ParseError("unexpected end of expression")
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self):
        if not self.tokens:
            raise ParseError("empty expression")
        node = self.expr()
        if self.i != len(self.tokens):
            raise ParseError(f"unexpected token {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.sum()
        while self.peek() == ("op", "@"):
            self.take()
            node = ("bin", "@", node, self.sum())
        return node

    def sum(self):
        node = self.prod()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = ("bin", op, node, self.prod())
        return node

    def prod(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = ("bin", op, node, self.unary())
        return node

    def unary(self):
        if self.peek() in (("op", "-"), ("op", "+")):
            op = self.take()[1]
            operand = self.unary()
            return ("neg", operand) if op == "-" else operand
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            return ("bin", "^", base, self.unary())
        return base

    def args(self, closing):
        items = []
        if self.peek() == ("op", closing):
            self.take()
            return items
        while True:
            items.append(self.expr())
            if self.peek() == ("op", ","):
                self.take()
                continue
            self.take(closing)
            return items

    def atom(self):
        kind, value = self.take()
        if kind == "num":
            return ("num", value)
        if kind == "name":
            if self.peek() == ("op", "("):
                self.take()
                return ("call", value, self.args(")"))
            return ("name", value)
        if value == "(":
            node = self.expr()
            self.take(")")
            return node
        if value == "{":
            return ("tuple", self.args("}"))
        raise ParseError(f"unexpected token {value!r}")


def parse(text: str):
    """Parse ``text`` into an expression tree."""
    return _Parser(tokenize(text)).parse()


def _number(literal: str):
    if literal.endswith("j"):
        return complex(literal)
    if re.fullmatch(r"\d+", literal):
        return int(literal)
    return float(literal)


def evaluate(
    tree,
    names: Mapping[str, Any] | Callable[[str], Any],
    functions: Mapping[str, Callable] | None = None,
    number: Callable[[str], Any] = _number,
):
    """Evaluate a parsed tree.

    ``names`` is either a mapping or a resolver callable that raises
    ``KeyError`` for unknown names.
    """
    functions = functions or {}

    def lookup(name):
        try:
            return names(name) if callable(names) else names[name]
        except KeyError:
            raise ParseError(f"unknown name {name!r}") from None

    def ev(node):
        tag = node[0]
        if tag == "num":
            return number(node[1])
        if tag == "name":
            return lookup(node[1])
        if tag == "neg":
            return -ev(node[1])
        if tag == "bin":
            left, right = ev(node[2]), ev(node[3])
            try:
                return _BINARY[node[1]](left, right)
            except TypeError as exc:
                raise ParseError(f"cannot apply {node[1]!r}: {exc}") from None
        if tag == "call":
            if node[1] not in functions:
                raise ParseError(f"unknown function {node[1]!r}")
            return functions[node[1]](*[ev(a) for a in node[2]])
        if tag == "tuple":
            return tuple(ev(a) for a in node[1])
        raise ParseError(f"bad node {tag!r}")

    return ev(tree)


# Functions available to boundary-data expressions; all act elementwise.
FIELD_FUNCTIONS = {
    "abs": np.abs,
    "sign": np.sign,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "min": np.minimum,
    "max": np.maximum,
}


def compile_field(text: str, variables: list[str]) -> Callable[[np.ndarray], np.ndarray]:
    """Compile an expression in ``variables`` into a vectorized function.

    The returned function takes an ``(m, len(variables))`` array of points and
    returns ``m`` values.
    """
    tree = parse(text)
    _check_names(tree, set(variables), set(FIELD_FUNCTIONS))

    def fn(points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        env = {v: points[:, i] for i, v in enumerate(variables)}
        env["pi"] = np.pi
        with np.errstate(all="ignore"):
            out = evaluate(tree, env, FIELD_FUNCTIONS)
        return np.broadcast_to(np.asarray(out, dtype=float), (points.shape[0],)).copy()

    return fn


def _check_names(tree, allowed_names, allowed_functions):
    tag = tree[0]
    if tag == "name":
        if tree[1] not in allowed_names and tree[1] != "pi":
            raise ParseError(f"unknown variable {tree[1]!r}")
    elif tag == "call":
        if tree[1] not in allowed_functions:
            raise ParseError(f"unknown function {tree[1]!r}")
        for a in tree[2]:
            _check_names(a, allowed_names, allowed_functions)
    elif tag == "neg":
        _check_names(tree[1], allowed_names, allowed_functions)
    elif tag == "bin":
        if tree[1] == "@":
            raise ParseError("'@' is not allowed in field expressions")
        _check_names(tree[2], allowed_names, allowed_functions)
        _check_names(tree[3], allowed_names, allowed_functions)
    elif tag == "tuple":
        raise ParseError("tuples are not allowed in field expressions")
