"""Arithmetic in the real Clifford algebra C(n) with e_j^2 = -1.

A basis blade e_I = e_{i1} e_{i2} ... e_{il} (i1 < ... < il) is encoded by the
bitmask with bit (i - 1) set for every i in I; the scalar 1 has mask 0. A
multivector stores one coefficient per mask, so 2^n of them, ordered by mask.

Complex numbers are C(1) and quaternions are C(2) under i -> e1, j -> e2,
k -> e1 e2; the :class:`Quaternion` type below keeps the usual a + bi + cj + dk
coordinates and is checked against that embedding in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Number

import numpy as np

from .errors import DimensionError, DomainError, ParseError, PreconditionError, SingularityError

MAX_GENERATORS = 12
_TABLE_LIMIT = 8  # dense sign tables are cached up to this n


def grade(mask: int) -> int:
    return bin(mask).count("1")


def mask_indices(mask: int) -> list[int]:
    """1-based generator indices of a blade mask, ascending."""
    return [i + 1 for i in range(mask.bit_length()) if mask >> i & 1]


def indices_mask(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << (i - 1)
    return m


def blade_sign(a: int, b: int) -> int:
    """Sign of e_a e_b relative to e_{a xor b}.

    Moving each generator of ``b`` left past the higher generators of ``a``
    costs one transposition each; every shared generator then squares to -1.
    """
    swaps = 0
    x = a >> 1
    while x:
        swaps += bin(x & b).count("1")
        x >>= 1
    swaps += bin(a & b).count("1")
    return -1 if swaps & 1 else 1


@lru_cache(maxsize=None)
def _tables(n: int):
    """For product formula (xy)[c] = sum_a x[a] * S[a, c] * y[a ^ c].

    Returns (XOR index table, sign table), both (2^n, 2^n).
    """
    size = 1 << n
    a = np.arange(size, dtype=np.int64)[:, None]
    b = np.arange(size, dtype=np.int64)[None, :]
    swaps = np.zeros((size, size), dtype=np.int64)
    x = a >> 1
    while np.any(x):
        swaps += np.bitwise_count(x & b)
        x = x >> 1
    swaps += np.bitwise_count(a & b)
    sign_ab = np.where(swaps & 1, -1, 1).astype(np.int8)
    xor = (a ^ np.arange(size)[None, :]).astype(np.intp)
    # reindex so that column c holds sign(a, a ^ c)
    sign_ac = np.take_along_axis(sign_ab, xor, axis=1)
    xor.setflags(write=False)
    sign_ac.setflags(write=False)
    return xor, sign_ac


def product_arrays(x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
    """Geometric product of coefficient arrays with shape (..., 2^n).

    Leading axes broadcast, which is what the field operators use.
    """
    if n <= _TABLE_LIMIT:
        xor, sign = _tables(n)
        if x.dtype == object or y.dtype == object:
            sign = sign.astype(object)
        return np.sum(x[..., :, None] * sign * y[..., xor], axis=-2)
    # sparse fallback for large n: only nonzero pairs
    x, y = np.broadcast_arrays(x, y)
    out = np.zeros(x.shape, dtype=np.result_type(x, y))
    flat_x = x.reshape(-1, x.shape[-1])
    flat_y = y.reshape(-1, y.shape[-1])
    flat_out = out.reshape(-1, out.shape[-1])
    for row in range(flat_x.shape[0]):
        xs = np.flatnonzero(flat_x[row])
        ys = np.flatnonzero(flat_y[row])
        for a in xs:
            for b in ys:
                flat_out[row, a ^ b] += blade_sign(int(a), int(b)) * flat_x[row, a] * flat_y[row, b]
    return out


@dataclass(frozen=True, eq=False)
class Multivector:
    """Element of C(n) as a dense vector of 2^n blade coefficients."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n <= MAX_GENERATORS:
            raise DimensionError(f"generator count must be in 1..{MAX_GENERATORS}, got {self.n}")
        c = np.asarray(self.coeffs)
        if c.dtype.kind in "iub":
            c = c.astype(float)
        elif c.dtype.kind == "O":
            c = c.copy()
        else:
            c = c.astype(float, copy=True)
        if c.shape != (1 << self.n,):
            raise DimensionError(f"C({self.n}) needs {1 << self.n} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # constructors

    @classmethod
    def zero(cls, n, exact=False):
        return cls(n, np.array([0] * (1 << n), dtype=object) if exact else np.zeros(1 << n))

    @classmethod
    def scalar(cls, n, value=1.0):
        return cls.blade(n, 0, value)

    @classmethod
    def blade(cls, n, mask, coef=1.0):
        if mask >= 1 << n or mask < 0:
            raise DimensionError(f"blade mask {mask} does not fit C({n})")
        exact = isinstance(coef, (int, Fraction)) and not isinstance(coef, bool)
        c = np.array([0] * (1 << n), dtype=object) if exact else np.zeros(1 << n)
        c[mask] = coef
        return cls(n, c)

    @classmethod
    def generator(cls, n, j, coef=1.0):
        """The generator e_j, 1-based."""
        if not 1 <= j <= n:
            raise DimensionError(f"generator e{j} does not exist in C({n})")
        return cls.blade(n, 1 << (j - 1), coef)

    @classmethod
    def vector(cls, xs):
        """Grade-1 element sum_j x_j e_j."""
        xs = list(xs)
        return cls.paravector(0.0, xs)

    @classmethod
    def paravector(cls, x0, xs):
        xs = list(xs)
        n = len(xs)
        exact = all(isinstance(v, (int, Fraction)) for v in [x0, *xs])
        c = np.array([0] * (1 << n), dtype=object) if exact else np.zeros(1 << n)
        c[0] = x0
        for j, v in enumerate(xs):
            c[1 << j] = v
        return cls(n, c)

    @classmethod
    def from_array(cls, values):
        values = np.asarray(values)
        n = int(round(math.log2(len(values)))) if len(values) else 0
        if len(values) != 1 << n:
            raise DimensionError(f"array length {len(values)} is not a power of two")
        return cls(n, values)

    @classmethod
    def from_text(cls, text, n):
        """Parse the text form, e.g. ``1.5*e12 + -2*e3``."""
        from .exprs import evaluate, parse

        def resolve(name):
            if name == "e":
                return cls.scalar(n)
            if name.startswith("e"):
                return cls.blade(n, _parse_blade_name(name, n))
            raise KeyError(name)

        value = evaluate(parse(text), resolve)
        if isinstance(value, Number):
            return cls.scalar(n, value)
        if not isinstance(value, Multivector):
            raise ParseError(f"expression does not evaluate to a multivector: {text!r}")
        return value

    # queries

    @property
    def dim(self):
        return 1 << self.n

    def is_exact(self):
        return self.coeffs.dtype == object

    def __getitem__(self, mask):
        return self.coeffs[mask]

    def grade_part(self, k):
        c = self.coeffs.copy()
        for m in range(self.dim):
            if grade(m) != k:
                c[m] = 0
        return Multivector(self.n, c)

    def grades(self):
        return sorted({grade(m) for m in np.flatnonzero(self.coeffs != 0)})

    def is_paravector(self, tol=0.0):
        return all(abs(self.coeffs[m]) <= tol for m in range(self.dim) if grade(m) > 1)

    def scalar_part(self):
        return self.coeffs[0]

    def norm(self):
        """Euclidean norm of the coefficient vector."""
        return math.sqrt(sum(float(v) * float(v) for v in self.coeffs))

    def reverse(self):
        c = self.coeffs.copy()
        for m in range(self.dim):
            g = grade(m)
            if (g * (g - 1) // 2) & 1:
                c[m] = -c[m]
        return Multivector(self.n, c)

    def conjugate(self):
        """Clifford conjugation: reversion combined with e_j -> -e_j."""
        c = self.coeffs.copy()
        for m in range(self.dim):
            g = grade(m)
            if (g * (g + 1) // 2) & 1:
                c[m] = -c[m]
        return Multivector(self.n, c)

    # arithmetic

    def _check(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        if other.n != self.n:
            raise DimensionError(f"cannot combine C({self.n}) with C({other.n})")
        return other

    def __add__(self, other):
        if isinstance(other, Number):
            other = Multivector.scalar(self.n, other)
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Multivector(self.n, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Multivector(self.n, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return Multivector(self.n, self.coeffs * other)
        if self._check(other) is NotImplemented:
            return NotImplemented
        return geometric_product(self, other)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return Multivector(self.n, other * self.coeffs)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Number):
            if self.is_exact() and isinstance(other, int):
                other = Fraction(other)
            return Multivector(self.n, self.coeffs / other)
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Multivector.scalar(self.n, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Number):
            other = Multivector.scalar(self.n, other)
        if not isinstance(other, Multivector) or other.n != self.n:
            return NotImplemented
        return bool(np.all(self.coeffs == other.coeffs))

    __hash__ = None

    def allclose(self, other, atol=1e-12):
        if isinstance(other, Number):
            other = Multivector.scalar(self.n, other)
        return other.n == self.n and bool(
            np.allclose(self.coeffs.astype(float), other.coeffs.astype(float), rtol=0, atol=atol)
        )

    # serialization

    def to_array(self):
        return np.array(self.coeffs)

    def to_text(self):
        terms = []
        for m in range(self.dim):
            c = self.coeffs[m]
            if c == 0:
                continue
            coef = _format_coef(c)
            terms.append(coef if m == 0 else f"{coef}*{blade_name(m, self.n)}")
        return " + ".join(terms) if terms else "0"

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"Multivector(n={self.n}, {self.to_text()!r})"


def blade_name(mask: int, n: int) -> str:
    idx = mask_indices(mask)
    if not idx:
        return "1"
    if n <= 9:
        return "e" + "".join(str(i) for i in idx)
    return "e{" + ",".join(str(i) for i in idx) + "}"


def _parse_blade_name(name: str, n: int) -> int:
    body = name[1:]
    if body.startswith("{"):
        parts = [p for p in body.strip("{}").split(",") if p]
        idx = [int(p) for p in parts]
    else:
        if not body.isdigit():
            raise KeyError(name)
        idx = [int(ch) for ch in body]
    if any(not 1 <= i <= n for i in idx):
        raise ParseError(f"blade {name} uses a generator outside 1..{n}")
    if len(set(idx)) != len(idx) or idx != sorted(idx):
        # unordered or repeated indices: evaluate as a product of generators
        out = Multivector.scalar(n, 1)
        for i in idx:
            out = out * Multivector.generator(n, i)
        nz = np.flatnonzero(out.coeffs)
        raise ParseError(
            f"blade {name} is not in canonical increasing order "
            f"(it equals {out.to_text()}, mask {int(nz[0]) if len(nz) else 0})"
        )
    return indices_mask(idx)


def _format_coef(c):
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else str(c)
    if isinstance(c, (int, np.integer)):
        return str(int(c))
    return format(float(c), ".17g")


def geometric_product(x: Multivector, y: Multivector) -> Multivector:
    if x.n != y.n:
        raise DimensionError(f"cannot multiply C({x.n}) by C({y.n})")
    return Multivector(x.n, product_arrays(x.coeffs, y.coeffs, x.n))


def paravector_inverse(x: Multivector, tol: float = 0.0) -> Multivector:
    """Inverse of x0 + sum x_j e_j, namely (x0 - sum x_j e_j) / (x0^2 + sum x_j^2)."""
    if not x.is_paravector(tol):
        raise DomainError(f"only paravectors (grades 0 and 1) are invertible here; got grades {x.grades()}")
    c = x.coeffs
    idx = [0] + [1 << j for j in range(x.n)]
    sq = sum(c[m] * c[m] for m in idx)
    if sq == 0:
        raise SingularityError("zero paravector has no inverse")
    out = np.array([0] * x.dim, dtype=object) if x.is_exact() else np.zeros(x.dim)
    out[0] = c[0]
    for j in range(x.n):
        out[1 << j] = -c[1 << j]
    if x.is_exact():
        sq = Fraction(sq)
    return Multivector(x.n, out / sq)


@dataclass(frozen=True)
class Quaternion:
    """a + b i + c j + d k with i^2 = j^2 = k^2 = -1 and k = ij = -ji."""

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __mul__(self, other):
        if isinstance(other, Number):
            return Quaternion(self.a * other, self.b * other, self.c * other, self.d * other)
        if not isinstance(other, Quaternion):
            return NotImplemented
        return quaternion_product(self, other)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, Number):
            other = Quaternion(other)
        if not isinstance(other, Quaternion):
            return NotImplemented
        return Quaternion(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    __radd__ = __add__

    def __neg__(self):
        return Quaternion(-self.a, -self.b, -self.c, -self.d)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __truediv__(self, other):
        if isinstance(other, Number):
            return Quaternion(self.a / other, self.b / other, self.c / other, self.d / other)
        return NotImplemented

    def conjugate(self):
        return quaternion_conjugate(self)

    def __abs__(self):
        return quaternion_modulus(self)

    def inverse(self):
        sq = self.a**2 + self.b**2 + self.c**2 + self.d**2
        if sq == 0:
            raise SingularityError("zero quaternion has no inverse")
        return self.conjugate() / sq

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)

    def to_multivector(self):
        return Multivector(2, np.array([self.a, self.b, self.c, self.d]))

    @classmethod
    def from_multivector(cls, x: Multivector):
        if x.n != 2:
            raise DimensionError("quaternions live in C(2)")
        return cls(*(x.coeffs[m] for m in range(4)))

    def allclose(self, other, atol=1e-12):
        return all(abs(p - q) <= atol for p, q in zip(self.as_tuple(), other.as_tuple()))

    def __str__(self):
        parts = []
        for value, unit in zip(self.as_tuple(), ("", "i", "j", "k")):
            if value == 0:
                continue
            if unit and value in (1, -1):
                text = unit if value == 1 else "-" + unit
            else:
                text = _format_coef(value) + unit
            parts.append(text)
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out


QUATERNION_UNITS = {
    "i": Quaternion(0, 1, 0, 0),
    "j": Quaternion(0, 0, 1, 0),
    "k": Quaternion(0, 0, 0, 1),
}


def quaternion_product(x: Quaternion, y: Quaternion) -> Quaternion:
    # table from i^2 = j^2 = -1, k = ij = -ji: jk = i, ki = j
    return Quaternion(
        x.a * y.a - x.b * y.b - x.c * y.c - x.d * y.d,
        x.a * y.b + x.b * y.a + x.c * y.d - x.d * y.c,
        x.a * y.c - x.b * y.d + x.c * y.a + x.d * y.b,
        x.a * y.d + x.b * y.c - x.c * y.b + x.d * y.a,
    )


def quaternion_conjugate(x: Quaternion) -> Quaternion:
    return Quaternion(x.a, -x.b, -x.c, -x.d)


def quaternion_modulus(x: Quaternion) -> float:
    return math.sqrt(x.a**2 + x.b**2 + x.c**2 + x.d**2)


def quaternion_sandwich(alpha: Quaternion, x: Quaternion, beta: Quaternion, tol: float = 1e-12) -> Quaternion:
    """x -> alpha x beta for unit alpha, beta; an orthogonal map of R^4."""
    for name, q in (("alpha", alpha), ("beta", beta)):
        if abs(quaternion_modulus(q) - 1.0) > tol:
            raise PreconditionError(f"{name} must be a unit quaternion, |{name}| = {quaternion_modulus(q)!r}")
    return alpha * x * beta


def sandwich_matrix(alpha: Quaternion, beta: Quaternion) -> np.ndarray:
    """4x4 real matrix of x -> alpha x beta in the basis 1, i, j, k."""
    basis = [Quaternion(1), *QUATERNION_UNITS.values()]
    return np.array([quaternion_sandwich(alpha, e, beta).as_tuple() for e in basis]).T
