"""Exact polynomials on R^n and their harmonic decomposition.

Coefficients are :class:`fractions.Fraction`. Every polynomial p splits as a
finite sum of |x|^{2k} h_k with h_k harmonic; per homogeneous degree d this
is a square linear system in the monomial coefficients of h_0, h_1, ...
(reconstruction equations plus Delta h_k = 0), solved once per (n, d) by
exact Gauss-Jordan elimination and cached.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb
from numbers import Number

import numpy as np

from .errors import DimensionError, ParseError

MAX_DEGREE = 20
MAX_VARS = 6


def monomials(n: int, d: int) -> list[tuple[int, ...]]:
    """Exponent tuples of degree d in graded-lex order (x1 highest first)."""
    if d < 0:
        return []
    out = []
    for combo in combinations_with_replacement(range(n), d):
        alpha = [0] * n
        for i in combo:
            alpha[i] += 1
        out.append(tuple(alpha))
    out.sort(reverse=True)
    return out


def _as_fraction(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    if isinstance(c, float):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"unsupported coefficient {c!r}")


@dataclass(frozen=True)
class Polynomial:
    """Sparse polynomial: exponent tuple -> nonzero Fraction."""

    n: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError("polynomials need at least one variable")
        clean = {}
        for alpha, c in self.terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.n or min(alpha) < 0:
                raise DimensionError(f"bad multi-index {alpha} for n={self.n}")
            c = _as_fraction(c)
            if c:
                clean[alpha] = clean.get(alpha, Fraction(0)) + c
        object.__setattr__(self, "terms", {a: c for a, c in sorted(clean.items(), key=_grlex_key) if c})

    # constructors

    @classmethod
    def zero(cls, n):
        return cls(n, {})

    @classmethod
    def constant(cls, n, c):
        return cls(n, {(0,) * n: c})

    @classmethod
    def variable(cls, n, j):
        alpha = [0] * n
        alpha[j - 1] = 1
        return cls(n, {tuple(alpha): 1})

    @classmethod
    def monomial(cls, alpha, c=1):
        return cls(len(alpha), {tuple(alpha): c})

    @classmethod
    def norm_squared(cls, n, k=1):
        """|x|^{2k}."""
        base = cls(n, {tuple(2 if i == j else 0 for i in range(n)): 1 for j in range(n)})
        out = cls.constant(n, 1)
        for _ in range(k):
            out = out * base
        return out

    # structure

    @property
    def degree(self):
        return max((sum(a) for a in self.terms), default=None)

    def is_zero(self):
        return not self.terms

    def is_homogeneous(self):
        return len({sum(a) for a in self.terms}) <= 1

    def coefficient(self, alpha):
        return self.terms.get(tuple(alpha), Fraction(0))

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.n != self.n:
                raise DimensionError(f"cannot combine n={self.n} with n={other.n}")
            return other
        if isinstance(other, (Number, Fraction)):
            return Polynomial.constant(self.n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, Fraction(0)) + c
        return Polynomial(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.n, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for a, c in self.terms.items():
            for b, e in other.terms.items():
                key = tuple(i + j for i, j in zip(a, b))
                out[key] = out.get(key, Fraction(0)) + c * e
        return Polynomial(self.n, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (Number, Fraction)):
            inv = 1 / _as_fraction(other)
            return Polynomial(self.n, {a: c * inv for a, c in self.terms.items()})
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Polynomial.constant(self.n, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (Number, Fraction)):
            other = Polynomial.constant(self.n, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, tuple(self.terms.items())))

    # calculus

    def derivative(self, j):
        """d/dx_j, 1-based."""
        out = {}
        for a, c in self.terms.items():
            if a[j - 1]:
                b = list(a)
                b[j - 1] -= 1
                out[tuple(b)] = c * a[j - 1]
        return Polynomial(self.n, out)

    def __call__(self, x):
        return evaluate(self, x)

    # text

    def to_text(self):
        if not self.terms:
            return "0"
        parts = []
        for a, c in self.terms.items():
            mono = " ".join(f"x{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(a) if e)
            coef = str(c)
            if mono:
                parts.append(mono if c == 1 else f"-{mono}" if c == -1 else f"{coef} {mono}")
            else:
                parts.append(coef)
        return " + ".join(parts)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"Polynomial(n={self.n}, {self.to_text()!r})"

    def to_json_terms(self):
        return [{"alpha": list(a), "coef": str(c)} for a, c in self.terms.items()]

    @classmethod
    def from_json_terms(cls, n, items):
        return cls(n, {tuple(t["alpha"]): Fraction(str(t["coef"])) for t in items})


def _grlex_key(item):
    alpha = item[0]
    return (-sum(alpha), tuple(-a for a in alpha))


_TERM_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?(?:\.\d+)?)|(?P<var>x(?P<idx>\d+)(?:\^(?P<exp>\d+))?)|(?P<op>[-+*()^]))")


def parse_polynomial(text: str, n: int | None = None) -> Polynomial:
    """Parse ``coef x1^a1 x2^a2 ...`` terms joined by ``+``/``-``.

    Rationals are written ``p/q``; juxtaposition or ``*`` multiplies.
    Parenthesized sub-expressions are allowed. ``n`` defaults to the largest
    variable index that occurs.
    """
    tokens = []
    pos = 0
    s = text.strip()
    while pos < len(s):
        m = _TERM_TOKEN.match(s, pos)
        if not m or m.end() == pos:
            raise ParseError(f"cannot parse polynomial near {s[pos:pos + 10]!r}")
        tokens.append(m)
        pos = m.end()
    if not tokens:
        raise ParseError("empty polynomial")
    max_idx = max((int(t.group("idx")) for t in tokens if t.group("var")), default=1)
    if n is None:
        n = max_idx
    if max_idx > n or any(t.group("var") and int(t.group("idx")) < 1 for t in tokens):
        raise ParseError(f"variable index out of range for n={n}")

    i = 0

    def peek():
        return tokens[i] if i < len(tokens) else None

    def expr():
        nonlocal i
        sign = 1
        t = peek()
        if t is not None and t.group("op") in ("+", "-"):
            sign = -1 if t.group("op") == "-" else 1
            i += 1
        acc = term() * sign
        while peek() is not None and peek().group("op") in ("+", "-"):
            sign = -1 if peek().group("op") == "-" else 1
            i += 1
            t = peek()
            if t is not None and t.group("op") in ("+", "-"):
                sign *= -1 if t.group("op") == "-" else 1
                i += 1
            acc = acc + term() * sign
        return acc

    def term():
        nonlocal i
        acc = factor()
        while True:
            t = peek()
            if t is None:
                return acc
            if t.group("op") == "*":
                i += 1
                acc = acc * factor()
            elif t.group("num") or t.group("var") or t.group("op") == "(":
                acc = acc * factor()
            else:
                return acc

    def factor():
        nonlocal i
        t = peek()
        if t is None:
            raise ParseError("unexpected end of polynomial")
        i += 1
        if t.group("num"):
            return Polynomial.constant(n, Fraction(t.group("num")))
        if t.group("var"):
            e = int(t.group("exp") or 1)
            return Polynomial.variable(n, int(t.group("idx"))) ** e
        if t.group("op") == "(":
            inner = expr()
            if peek() is None or peek().group("op") != ")":
                raise ParseError("missing ')'")
            i += 1
            if peek() is not None and peek().group("op") == "^":
                i += 1
                e = peek()
                if e is None or not (e.group("num") or "").isdigit():
                    raise ParseError("exponent must be a nonnegative integer")
                i += 1
                inner = inner ** int(e.group("num"))
            return inner
        raise ParseError(f"unexpected {t.group(0).strip()!r}")

    result = expr()
    if i != len(tokens):
        raise ParseError(f"unexpected {tokens[i].group(0).strip()!r}")
    return result


def evaluate(p: Polynomial, x):
    """Value at x; x may be a point (n,) or an array of points (m, n)."""
    x = np.asarray(x)
    if x.shape[-1] != p.n:
        raise DimensionError(f"point has dimension {x.shape[-1]}, polynomial has n={p.n}")
    if x.dtype == object:
        total = Fraction(0)
        for a, c in p.terms.items():
            v = c
            for xi, e in zip(x, a):
                v *= Fraction(xi) ** e
            total += v
        return total
    x = x.astype(float)
    out = np.zeros(x.shape[:-1])
    for a, c in p.terms.items():
        out = out + float(c) * np.prod(x ** np.array(a), axis=-1)
    return out if out.ndim else float(out)


def laplacian(p: Polynomial) -> Polynomial:
    out: dict = {}
    for a, c in p.terms.items():
        for j, e in enumerate(a):
            if e >= 2:
                b = list(a)
                b[j] -= 2
                key = tuple(b)
                out[key] = out.get(key, Fraction(0)) + c * e * (e - 1)
    return Polynomial(p.n, out)


def euler_apply(p: Polynomial) -> Polynomial:
    """sum_j x_j dp/dx_j; multiplies each monomial by its degree."""
    return Polynomial(p.n, {a: c * sum(a) for a, c in p.terms.items()})


def homogeneous_parts(p: Polynomial) -> dict[int, Polynomial]:
    parts: dict[int, dict] = {}
    for a, c in p.terms.items():
        parts.setdefault(sum(a), {})[a] = c
    return {d: Polynomial(p.n, t) for d, t in sorted(parts.items())}


def is_harmonic(p: Polynomial) -> bool:
    return laplacian(p).is_zero()


def _gauss_jordan(rows, ncols, rhs):
    """Solve the square system given as sparse rows (dict col -> Fraction).

    ``rhs`` is a list of dict-rows (one per equation) over right-hand-side
    columns. Returns solution rows: dict unknown -> dict rhs-col -> value.
    """
    rows = [dict(r) for r in rows]
    rhs = [dict(r) for r in rhs]
    pivot_of = {}
    used = [False] * len(rows)
    for col in range(ncols):
        piv = None
        for r in range(len(rows)):
            if not used[r] and rows[r].get(col):
                if piv is None or len(rows[r]) < len(rows[piv]):
                    piv = r
        if piv is None:
            raise ArithmeticError(f"singular harmonic decomposition system at column {col}")
        used[piv] = True
        pivot_of[col] = piv
        pv = rows[piv][col]
        if pv != 1:
            inv = 1 / pv
            rows[piv] = {k: v * inv for k, v in rows[piv].items()}
            rhs[piv] = {k: v * inv for k, v in rhs[piv].items()}
        prow, prhs = rows[piv], rhs[piv]
        for r in range(len(rows)):
            if r == piv:
                continue
            f = rows[r].get(col)
            if not f:
                continue
            row = rows[r]
            for k, v in prow.items():
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
            rr = rhs[r]
            for k, v in prhs.items():
                nv = rr.get(k, 0) - f * v
                if nv:
                    rr[k] = nv
                else:
                    rr.pop(k, None)
    for r in range(len(rows)):
        if not used[r] and (rows[r] or rhs[r]):
            raise ArithmeticError("inconsistent harmonic decomposition system")
    return {col: rhs[pivot_of[col]] for col in range(ncols)}


@lru_cache(maxsize=None)
def _degree_solution(n: int, d: int):
    """Decomposition of every degree-d monomial at once.

    Returns (monomial list of degree d, list of k, per-k monomial lists,
    solution map) where solution[(k, beta)] is a dict from degree-d monomial
    index to the coefficient of x^beta in h_k.
    """
    if d > MAX_DEGREE or n > MAX_VARS:
        raise DimensionError(f"decomposition limited to d <= {MAX_DEGREE}, n <= {MAX_VARS}")
    target = monomials(n, d)
    target_idx = {a: i for i, a in enumerate(target)}
    ks = list(range(d // 2 + 1))
    blocks = [monomials(n, d - 2 * k) for k in ks]
    unknowns = [(k, b) for k in ks for b in blocks[k]]
    col_of = {u: i for i, u in enumerate(unknowns)}
    rows, rhs = [], []
    # reconstruction: sum_k |x|^{2k} h_k = x^alpha for each target monomial alpha
    recon: list[dict] = [dict() for _ in target]
    for k in ks:
        rk = Polynomial.norm_squared(n, k)
        for b in blocks[k]:
            for a, c in rk.terms.items():
                key = tuple(i + j for i, j in zip(a, b))
                recon[target_idx[key]][col_of[(k, b)]] = c
    for i, row in enumerate(recon):
        rows.append(row)
        rhs.append({i: Fraction(1)})
    # harmonicity: Delta h_k = 0, one equation per monomial of degree d - 2k - 2
    for k in ks:
        lower = monomials(n, d - 2 * k - 2)
        if not lower:
            continue
        lower_idx = {a: i for i, a in enumerate(lower)}
        eqs: list[dict] = [dict() for _ in lower]
        for b in blocks[k]:
            for j, e in enumerate(b):
                if e >= 2:
                    g = list(b)
                    g[j] -= 2
                    eqs[lower_idx[tuple(g)]][col_of[(k, b)]] = Fraction(e * (e - 1))
        for row in eqs:
            rows.append(row)
            rhs.append({})
    if len(rows) != len(unknowns):
        raise ArithmeticError("harmonic decomposition system is not square")
    sol = _gauss_jordan(rows, len(unknowns), rhs)
    return target, ks, blocks, {unknowns[c]: v for c, v in sol.items()}


def harmonic_decomposition(p: Polynomial) -> list[tuple[int, Polynomial]]:
    """Terms (k, h_k) with p = sum_k |x|^{2k} h_k and every h_k harmonic.

    h_k collects the homogeneous harmonic pieces of degree d - 2k over all
    homogeneous degrees d of p. Zero terms are dropped; k ascending.
    """
    acc: dict[int, dict] = {}
    for d, part in homogeneous_parts(p).items():
        target, ks, blocks, sol = _degree_solution(p.n, d)
        tidx = {a: i for i, a in enumerate(target)}
        coeffs = {tidx[a]: c for a, c in part.terms.items()}
        for k in ks:
            bucket = acc.setdefault(k, {})
            for b in blocks[k]:
                weights = sol[(k, b)]
                v = sum((c * weights[i] for i, c in coeffs.items() if i in weights), Fraction(0))
                if v:
                    bucket[b] = bucket.get(b, Fraction(0)) + v
    out = []
    for k in sorted(acc):
        h = Polynomial(p.n, acc[k])
        if not h.is_zero():
            out.append((k, h))
    return out


def recombine(n: int, terms) -> Polynomial:
    total = Polynomial.zero(n)
    for k, h in terms:
        total = total + Polynomial.norm_squared(n, k) * h
    return total


def harmonic_basis(n: int, d: int) -> list[Polynomial]:
    """Basis of homogeneous harmonic polynomials of degree d (reduced row echelon)."""
    if n < 1 or d < 0:
        raise DimensionError("need n >= 1 and d >= 0")
    mons = monomials(n, d)
    index = {a: i for i, a in enumerate(mons)}
    vectors = []
    for a in mons:
        h0 = dict(harmonic_decomposition(Polynomial.monomial(a))).get(0)
        if h0 is not None:
            vectors.append({index[b]: c for b, c in h0.terms.items()})
    # exact row reduction to reduced echelon form
    basis: list[dict] = []
    pivots: list[int] = []
    for v in vectors:
        v = dict(v)
        for piv, row in zip(pivots, basis):
            f = v.get(piv)
            if f:
                for k, c in row.items():
                    nv = v.get(k, 0) - f * c
                    if nv:
                        v[k] = nv
                    else:
                        v.pop(k, None)
        if not v:
            continue
        piv = min(v)
        inv = 1 / v[piv]
        v = {k: c * inv for k, c in v.items()}
        for i, row in enumerate(basis):
            f = row.get(piv)
            if f:
                for k, c in v.items():
                    nv = row.get(k, 0) - f * c
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
        basis.append(v)
        pivots.append(piv)
    order = sorted(range(len(basis)), key=lambda i: pivots[i])
    return [Polynomial(n, {mons[k]: c for k, c in basis[i].items()}) for i in order]


def harmonic_dimension(n: int, d: int) -> int:
    """dim of degree-d homogeneous harmonics: C(n+d-1, d) - C(n+d-3, d-2)."""
    lower = comb(n + d - 3, d - 2) if d >= 2 else 0
    return comb(n + d - 1, d) - lower


def decomposition_to_json(p: Polynomial, terms) -> str:
    return json.dumps(
        {
            "n": p.n,
            "input": p.to_text(),
            "terms": [{"k": k, "h": h.to_text(), "h_terms": h.to_json_terms()} for k, h in terms],
            "reconstructs": recombine(p.n, terms) == p and all(is_harmonic(h) for _, h in terms),
        },
        sort_keys=True,
        indent=2,
    )
