"""Linear fractional maps of the extended plane and conformal chains on R^n.

The point at infinity is the sentinel ``INF``. Maps are stored normalized to
determinant one, so the remaining scalar ambiguity is a sign.
"""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DimensionError, ParseError, PreconditionError


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    __str__ = __repr__

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
Extended = Union[complex, _Infinity]


def is_inf(z) -> bool:
    return z is INF


# extended arithmetic, following 1/inf = 0, 1/0 = inf, a + inf = inf, a * inf = inf (a != 0)

def ext_add(a, b):
    if is_inf(a) and is_inf(b):
        raise PreconditionError("inf + inf is undefined")
    if is_inf(a) or is_inf(b):
        return INF
    return complex(a) + complex(b)


def ext_mul(a, b):
    if is_inf(a) or is_inf(b):
        other = b if is_inf(a) else a
        if not is_inf(other) and complex(other) == 0:
            raise PreconditionError("0 * inf is undefined")
        return INF
    return complex(a) * complex(b)


def ext_recip(a):
    if is_inf(a):
        return 0j
    a = complex(a)
    return INF if a == 0 else 1.0 / a


@dataclass(frozen=True, eq=False)
class MoebiusMap:
    """z -> (a z + b) / (c z + d) with ad - bc = 1."""

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def from_coefficients(cls, a, b, c, d, tol: float = 1e-12):
        a, b, c, d = (complex(v) for v in (a, b, c, d))
        det = a * d - b * c
        if abs(det) < tol:
            raise PreconditionError(f"determinant ad - bc = {det} is (numerically) zero")
        s = cmath.sqrt(det)
        return cls(a / s, b / s, c / s, d / s)

    @classmethod
    def from_matrix(cls, M):
        M = np.asarray(M, dtype=complex)
        if M.shape != (2, 2):
            raise DimensionError("Moebius matrices are 2 x 2")
        return cls.from_coefficients(M[0, 0], M[0, 1], M[1, 0], M[1, 1])

    @classmethod
    def identity(cls):
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    @classmethod
    def scale(cls, lam):
        return cls.from_coefficients(lam, 0, 0, 1)

    @classmethod
    def translate(cls, b):
        return cls.from_coefficients(1, b, 0, 1)

    @classmethod
    def invert(cls):
        return cls.from_coefficients(0, 1, 1, 0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __call__(self, z):
        return apply(self, z)

    def __matmul__(self, other):
        return compose(self, other)

    def __eq__(self, other):
        if not isinstance(other, MoebiusMap):
            return NotImplemented
        return self.equivalent(other)

    __hash__ = None

    def equivalent(self, other, tol: float = 1e-12) -> bool:
        """Equal as maps: matrices agree up to sign after normalization."""
        A, B = self.matrix, other.matrix
        return bool(np.max(np.abs(A - B)) <= tol or np.max(np.abs(A + B)) <= tol)

    def to_dict(self):
        return {k: [getattr(self, k).real, getattr(self, k).imag] for k in "abcd"}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
            return cls.from_coefficients(*(complex(*data[k]) for k in "abcd"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"map JSON needs a, b, c, d as [re, im] pairs: {exc}") from None


def apply(m: MoebiusMap, z):
    """Total on the extended plane by case analysis."""
    a, b, c, d = m.a, m.b, m.c, m.d
    if is_inf(z):
        return INF if c == 0 else a / c
    z = complex(z)
    den = c * z + d
    num = a * z + b
    if den == 0:
        # ad - bc != 0 forces num != 0 here
        return INF
    return num / den


def compose(m1: MoebiusMap, m2: MoebiusMap) -> MoebiusMap:
    """The map z -> m1(m2(z)), from the matrix product."""
    return MoebiusMap.from_matrix(m1.matrix @ m2.matrix)


def inverse(m: MoebiusMap) -> MoebiusMap:
    # det = 1, so the inverse matrix is the adjugate
    return MoebiusMap(m.d, -m.b, -m.c, m.a)


# decomposition over C

@dataclass(frozen=True)
class Block:
    kind: str  # "scale", "translate", "invert"
    value: complex = 0j

    def __call__(self, z):
        if self.kind == "scale":
            return INF if is_inf(z) else self.value * complex(z)
        if self.kind == "translate":
            return INF if is_inf(z) else complex(z) + self.value
        if self.kind == "invert":
            return ext_recip(z)
        raise ValueError(f"unknown block {self.kind!r}")

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind != "invert":
            out["value"] = [self.value.real, self.value.imag]
        return out


def decompose(m: MoebiusMap) -> list[Block]:
    """Blocks z -> az, z -> z + b, z -> 1/z whose replay (left to right) is m.

    c = 0: scale a/d then translate b/d. Otherwise
    (az + b)/(cz + d) = a/c - (1/c) / (cz + d), using ad - bc = 1.
    """
    a, b, c, d = m.a, m.b, m.c, m.d
    blocks = []
    if c == 0:
        if a / d != 1:
            blocks.append(Block("scale", a / d))
        if b / d != 0:
            blocks.append(Block("translate", b / d))
        return blocks
    if c != 1:
        blocks.append(Block("scale", c))
    if d != 0:
        blocks.append(Block("translate", d))
    blocks.append(Block("invert"))
    k = -(a * d - b * c) / c
    if k != 1:
        blocks.append(Block("scale", k))
    if a / c != 0:
        blocks.append(Block("translate", a / c))
    return blocks


def replay(blocks, z):
    for blk in blocks:
        z = blk(z)
    return z


# n-dimensional blocks on R^n u {inf}

@dataclass(frozen=True, eq=False)
class Translation:
    v: np.ndarray

    def __call__(self, x):
        return INF if is_inf(x) else np.asarray(x, dtype=float) + self.v

    @property
    def n(self):
        return len(self.v)


@dataclass(frozen=True)
class Dilation:
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise PreconditionError("dilation factor must be positive")

    def __call__(self, x):
        return INF if is_inf(x) else self.lam * np.asarray(x, dtype=float)

    n = None


@dataclass(frozen=True, eq=False)
class Orthogonal:
    A: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or np.max(np.abs(A.T @ A - np.eye(A.shape[0]))) > 1e-10:
            raise PreconditionError("orthogonal block needs an orthogonal matrix")
        object.__setattr__(self, "A", A)

    def __call__(self, x):
        return INF if is_inf(x) else self.A @ np.asarray(x, dtype=float)

    @property
    def n(self):
        return self.A.shape[0]


@dataclass(frozen=True)
class SphereInversion:
    """x -> x / |x|^2 with 0 <-> inf."""

    def __call__(self, x):
        if is_inf(x):
            return INF
        x = np.asarray(x, dtype=float)
        r2 = float(x @ x)
        if r2 == 0:
            return INF
        return x / r2

    n = None


def _block_dims(chain):
    dims = {b.n for b in chain if getattr(b, "n", None) is not None}
    if len(dims) > 1:
        raise DimensionError(f"chain mixes dimensions {sorted(dims)}")
    return dims.pop() if dims else None


def chain_apply(chain, x):
    """Replay blocks left to right on a point of R^n or INF."""
    n = _block_dims(chain)
    if not is_inf(x) and n is not None and np.asarray(x).shape != (n,):
        raise DimensionError(f"chain acts on R^{n}")
    for blk in chain:
        if is_inf(x):
            # translation, dilation, orthogonal fix inf; inversion sends it to 0
            x = np.zeros(n or 1) if isinstance(blk, SphereInversion) else INF
            if isinstance(blk, SphereInversion) and n is None:
                raise DimensionError("cannot infer the dimension for the image of inf")
        else:
            x = blk(x)
    return x


def chain_from_complex(blocks) -> list:
    """The R^2 version of a complex chain.

    1/z is conjugation followed by inversion in the unit circle; complex
    scaling is a dilation by |a| and a rotation.
    """
    out = []
    conj = np.diag([1.0, -1.0])
    for blk in blocks:
        if blk.kind == "translate":
            out.append(Translation(np.array([blk.value.real, blk.value.imag])))
        elif blk.kind == "scale":
            r, th = abs(blk.value), cmath.phase(blk.value)
            out.append(Dilation(r))
            out.append(Orthogonal(np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])))
        else:
            out.append(SphereInversion())
            out.append(Orthogonal(conj))
    return out


def to_plane(z):
    return INF if is_inf(z) else np.array([complex(z).real, complex(z).imag])


def from_plane(x):
    return INF if is_inf(x) else complex(x[0], x[1])


def chain_to_json(chain) -> str:
    out = []
    for blk in chain:
        if isinstance(blk, Translation):
            out.append({"kind": "translation", "v": blk.v.tolist()})
        elif isinstance(blk, Dilation):
            out.append({"kind": "dilation", "lambda": blk.lam})
        elif isinstance(blk, Orthogonal):
            out.append({"kind": "orthogonal", "A": blk.A.tolist()})
        elif isinstance(blk, SphereInversion):
            out.append({"kind": "inversion"})
        elif isinstance(blk, Block):
            out.append(blk.to_dict())
    return json.dumps(out)


def parse_extended(text: str):
    """'inf' / 'oo' for infinity, else a Python complex literal such as 1+2j."""
    t = text.strip().lower()
    if t in ("inf", "oo", "infinity"):
        return INF
    try:
        return complex(t.replace(" ", ""))
    except ValueError:
        raise ParseError(f"not an extended complex number: {text!r}") from None


def format_extended(z) -> str:
    if is_inf(z):
        return "inf"
    z = complex(z)
    return f"{format(z.real, '.17g')},{format(z.imag, '.17g')}"
