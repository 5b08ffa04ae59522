"""Complex power series: radius estimates, evaluation, products, Abel sums, exp and log.

A series is a finite coefficient prefix plus an optional rule n -> a_n for
the rest. Exact prefixes (int/Fraction) stay exact under derivative and
Cauchy product.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, PreconditionError, SingularityError

DEFAULT_PREFIX = 64
MIN_COEFFS = 16
MARGIN = 0.01
MAX_TERMS = 1 << 22


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """sum_n a_n z^n.

    ``tail_bound(N, rho)``, when given, bounds sum_{n > N} |a_n| rho^n and
    is what allows evaluation on the circle of convergence.
    """

    coeffs: tuple
    rule: Callable[[int], complex] | None = None
    tail_bound: Callable[[int, float], float] | None = None
    name: str = ""

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise PreconditionError("a series needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    def coefficient(self, k: int):
        if k < len(self.coeffs):
            return self.coeffs[k]
        if self.rule is None:
            raise IndexError(f"coefficient {k} is beyond the stored prefix and no rule is known")
        return self.rule(k)

    def available(self, k: int) -> bool:
        return k < len(self.coeffs) or self.rule is not None

    def prefix(self, N: int) -> list:
        return [self.coefficient(k) for k in range(N)]

    @property
    def is_exact(self):
        return all(isinstance(c, (int, Fraction)) for c in self.coeffs)

    def check_rule(self, tol: float = 1e-12) -> bool:
        """Stored prefix agrees with the rule where both exist."""
        if self.rule is None:
            return True
        for k, c in enumerate(self.coeffs):
            r = self.rule(k)
            if abs(complex(c) - complex(r)) > tol * max(1.0, abs(complex(r))):
                return False
        return True

    def to_json(self) -> str:
        return json.dumps([[complex(c).real, complex(c).imag] for c in self.coeffs])

    @classmethod
    def from_json(cls, text: str, name: str = ""):
        data = json.loads(text)
        try:
            coeffs = [complex(float(re), float(im)) for re, im in data]
        except (TypeError, ValueError) as exc:
            raise PreconditionError(f"series JSON must be a list of [re, im] pairs: {exc}") from None
        return cls(tuple(coeffs), name=name)

    @classmethod
    def from_rule(cls, rule, N: int = DEFAULT_PREFIX, tail_bound=None, name=""):
        return cls(tuple(rule(k) for k in range(N)), rule, tail_bound, name)


# standard series

def geometric() -> PowerSeries:
    return PowerSeries.from_rule(lambda k: 1, name="geometric")


def exp_series(N: int = DEFAULT_PREFIX) -> PowerSeries:
    return PowerSeries.from_rule(lambda k: Fraction(1, math.factorial(k)), N, name="exp")


def factorial_series(N: int = DEFAULT_PREFIX) -> PowerSeries:
    return PowerSeries.from_rule(math.factorial, N, name="factorial")


def inverse_square_series(N: int = DEFAULT_PREFIX) -> PowerSeries:
    """sum_{n >= 1} z^n / n^2, with its absolute tail bound on |z| <= 1."""

    def tail(N, rho):
        if rho > 1:
            return math.inf
        return rho ** (N + 1) / N if N > 0 else math.inf

    return PowerSeries.from_rule(lambda k: Fraction(1, k * k) if k else 0, N, tail, "inverse-square")


def constant(c=1) -> PowerSeries:
    return PowerSeries((c,), lambda k: 0, name="constant")


# radius of convergence

def _log_abs(c) -> float:
    if isinstance(c, int):
        return math.log(abs(c)) if c else -math.inf
    if isinstance(c, Fraction):
        if c == 0:
            return -math.inf
        return math.log(abs(c.numerator)) - math.log(c.denominator)
    a = abs(complex(c))
    return math.log(a) if a > 0 else -math.inf


@dataclass(frozen=True)
class RadiusEstimate:
    kind: str  # "zero", "finite" or "infinite"
    value: float
    reliable: bool
    note: str = ""

    def __float__(self):
        return self.value


RULE_DEPTH = 512
SLOPE_CUT = 0.5


def radius_of_convergence(s: PowerSeries, depth: int | None = None) -> RadiusEstimate:
    """1 / limsup |a_n|^{1/n} from the coefficient tail.

    L_n = log|a_n| / n is fitted on the upper half of the available indices
    by L_inf + c log(n)/n + d/n + e/n^2, which captures (n + m)^k R^{-n}
    growth to O(n^-3). A clear trend of L_n against log n (slope beyond
    +-1/2) means factorial-like growth or decay, giving radius zero or
    infinity.
    """
    N = depth or (RULE_DEPTH if s.rule is not None else len(s.coeffs))
    if not s.available(MIN_COEFFS - 1) or N < MIN_COEFFS:
        raise PreconditionError(f"need at least {MIN_COEFFS} coefficients or a rule")
    idx, L = [], []
    for k in range(max(1, N // 2), N):
        la = _log_abs(s.coefficient(k))
        if la > -math.inf:
            idx.append(k)
            L.append(la / k)
    reliable = s.rule is not None
    note = "" if reliable else f"estimated from a {N}-term prefix"
    if len(idx) < 4:
        return RadiusEstimate("infinite", math.inf, False, "tail coefficients vanish")
    n = np.array(idx, dtype=float)
    L = np.array(L)
    slope = np.polyfit(np.log(n), L, 1)[0]
    if slope > SLOPE_CUT:
        return RadiusEstimate("zero", 0.0, reliable, note)
    if slope < -SLOPE_CUT:
        return RadiusEstimate("infinite", math.inf, reliable, note)
    A = np.column_stack([np.ones_like(n), np.log(n) / n, 1.0 / n, 1.0 / n**2])
    coef, *_ = np.linalg.lstsq(A, L, rcond=None)
    # limsup, not mean: lift the fit onto the upper envelope of irregular tails
    coef[0] += max(0.0, float(np.max(L - A @ coef)))
    R = math.exp(-coef[0])
    return RadiusEstimate("finite", R, reliable, note)


# evaluation

def _float_coeffs(s: PowerSeries, N: int, start: int = 0) -> np.ndarray:
    out = np.empty(N - start, dtype=complex)
    for k in range(start, N):
        c = s.coefficient(k)
        try:
            out[k - start] = complex(c)
        except OverflowError:
            out[k - start] = complex(math.inf)
    return out


def _horner(a: np.ndarray, z: complex) -> complex:
    acc = 0j
    for c in a[::-1]:
        acc = acc * z + c
    return acc


def evaluate(s: PowerSeries, z: complex, tol: float = 1e-12, return_terms: bool = False):
    """Partial sum whose tail is below ``tol``.

    Inside the radius the tail is compared with a geometric series: with
    rho = (|z| + R')/2 and M = max |a_n| rho^n over the sampled coefficients,
    sum_{n > N} |a_n||z|^n <= M q^{N+1}/(1 - q), q = |z|/rho. On or near the
    circle of convergence a declared ``tail_bound`` is required.
    """
    z = complex(z)
    az = abs(z)
    if az == 0:
        value = complex(s.coefficient(0))
        return (value, 1) if return_terms else value
    est = radius_of_convergence(s)
    R = est.value
    if az < R * (1 - MARGIN):
        rho = 0.5 * (az + R) if math.isfinite(R) else 2.0 * az + 1.0
        q = az / rho
        sample = min(len(s.coeffs), DEFAULT_PREFIX) if s.rule is None else max(DEFAULT_PREFIX, int(4 * rho) + 16)
        a = _float_coeffs(s, sample)
        with np.errstate(over="ignore"):
            M = float(np.max(np.abs(a) * rho ** np.arange(sample)))
        if not math.isfinite(M):
            raise ConvergenceError("coefficient growth overflows the tail estimate")
        if M == 0:
            N = sample
        else:
            N = max(1, math.ceil((math.log(tol * (1 - q) / M)) / math.log(q)))
        if N > MAX_TERMS:
            raise ConvergenceError(f"{N} terms needed for tolerance {tol}")
        if not s.available(N):
            raise ConvergenceError(f"{N} terms needed but only {len(s.coeffs)} are known")
    elif s.tail_bound is not None and s.tail_bound(1, az) < math.inf:
        N = 1
        while s.tail_bound(N, az) >= tol:
            N *= 2
            if N > MAX_TERMS:
                raise ConvergenceError(f"tail bound does not reach {tol} within {MAX_TERMS} terms")
    else:
        raise ConvergenceError(f"|z| = {az:g} is not safely inside the radius {R:g} and no tail bound is declared")
    a = _float_coeffs(s, N + 1)
    value = complex(np.polynomial.polynomial.polyval(z, a)) if N > 4096 else _horner(a, z)
    return (value, N + 1) if return_terms else value


def partial_sums(s: PowerSeries, z: complex, N: int) -> np.ndarray:
    a = _float_coeffs(s, N)
    return np.cumsum(a * complex(z) ** np.arange(N))


# algebra

def derivative(s: PowerSeries) -> PowerSeries:
    coeffs = [k * s.coeffs[k] for k in range(1, len(s.coeffs))] or [0]
    rule = None
    if s.rule is not None:
        base = s.rule
        rule = lambda k: (k + 1) * base(k + 1)  # noqa: E731
    return PowerSeries(tuple(coeffs), rule, name=f"d({s.name})" if s.name else "")


def cauchy_product(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """C_n = sum_{j <= n} A_j B_{n-j}; exact when both prefixes are exact."""
    N = min(len(a.coeffs), len(b.coeffs))
    if a.rule is not None and b.rule is not None:
        N = max(len(a.coeffs), len(b.coeffs))
    A = [a.coefficient(k) for k in range(N)]
    B = [b.coefficient(k) for k in range(N)]
    C = tuple(sum(A[j] * B[n - j] for j in range(n + 1)) for n in range(N))
    rule = None
    if a.rule is not None and b.rule is not None:
        rule = lambda n: sum(a.coefficient(j) * b.coefficient(n - j) for j in range(n + 1))  # noqa: E731
    return PowerSeries(C, rule, name=f"{a.name}*{b.name}" if a.name and b.name else "")


# Abel summation

@dataclass(frozen=True)
class AbelReport:
    value: complex
    radii: tuple
    sums: tuple
    estimates: tuple
    summable: bool
    note: str = ""


ABEL_KS = tuple(range(3, 13))


def _neville_zero(h, v):
    t = list(v)
    for k in range(1, len(h)):
        for i in range(len(h) - k):
            t[i] = (h[i + k] * t[i] - h[i] * t[i + 1]) / (h[i + k] - h[i])
    return t[0]


ABEL_CHUNK = 1024


def abel_sum(s: PowerSeries, z: complex = 1.0, ks: Sequence[int] = ABEL_KS, tol: float = 1e-6) -> AbelReport:
    """sum r^n a_n z^n at r = 1 - 2^{-k}, extrapolated to r = 1 with 3-point Richardson in 1 - r."""
    z = complex(z)
    ks = list(ks)
    h = [2.0**-k for k in ks]
    r_max = 1 - h[-1]
    # truncate where r^n * poly(n) is negligible
    N = int(math.ceil(45.0 / -math.log(r_max))) + 64
    if not s.available(N):
        raise ConvergenceError(f"Abel sums need {N} coefficients; only {len(s.coeffs)} are known")
    # coefficients are expanded in chunks: the growth screen runs before the
    # full length is built, and decaying tails stop once they are negligible
    chunks, peak = [], 0.0
    for start in range(0, N, ABEL_CHUNK):
        a = _float_coeffs(s, min(N, start + ABEL_CHUNK), start)
        with np.errstate(over="ignore", invalid="ignore"):
            chunk = a * z ** np.arange(start, start + a.size)
        mags = np.abs(chunk)
        if not np.all(np.isfinite(mags)):
            return AbelReport(complex("nan"), (), (), (), False, "terms overflow")
        chunks.append(chunk)
        if start == 0:
            # polynomial bound: log|A_n| must not keep growing linearly in n
            nz = mags[1:] > 0
            ns = np.arange(1, a.size)[nz]
            if ns.size > 8 and np.polyfit(ns, np.log(mags[1:][nz]), 1)[0] > 1e-3:
                return AbelReport(complex("nan"), (), (), (), False, "terms grow exponentially")
        top = float(np.max(mags))
        if start > 0 and top <= 1e-18 * peak:
            break
        peak = max(peak, top)
    terms = np.concatenate(chunks)
    n = np.arange(terms.size)
    sums = []
    for hk in h:
        r = 1 - hk
        sums.append(complex(np.sum(terms * r**n)))
    est = [_neville_zero(h[i:i + 3], sums[i:i + 3]) for i in range(len(h) - 2)]
    value = est[-1]
    gap = abs(est[-1] - est[-2]) if len(est) > 1 else math.inf
    ok = gap <= tol * max(1.0, abs(value))
    note = "" if ok else f"extrapolated Abel sums drift by {gap:.3g}"
    return AbelReport(value, tuple(1 - x for x in h), tuple(sums), tuple(est), ok, note)


# exp and log

LN2 = math.log(2.0)
TWO_PI = 2.0 * math.pi
_EXP_TERMS = 24
_INV_FACT = [1.0 / math.factorial(k) for k in range(_EXP_TERMS)]
_SQUARINGS = 3


def exp_complex(z: complex) -> complex:
    """exp by argument reduction and series summation.

    The imaginary part is reduced modulo 2 pi, the real part by integer
    multiples of log 2; the remainder is divided by 8, summed as a series,
    and squared three times.
    """
    z = complex(z)
    y = math.remainder(z.imag, TWO_PI)
    k = round(z.real / LN2)
    x = z.real - k * LN2
    w = complex(x, y) / (1 << _SQUARINGS)
    acc = 0j
    for c in reversed(_INV_FACT):
        acc = acc * w + c
    for _ in range(_SQUARINGS):
        acc = acc * acc
    try:
        return complex(math.ldexp(acc.real, k), math.ldexp(acc.imag, k))
    except OverflowError:
        return complex(math.copysign(math.inf, acc.real), math.copysign(math.inf, acc.imag))


def log_branch(zeta: complex, branch: int = 0) -> complex:
    """log|zeta| + i (Arg zeta + 2 pi branch), Arg in (-pi, pi]."""
    zeta = complex(zeta)
    if zeta == 0:
        raise SingularityError("logarithm of zero")
    return complex(math.log(abs(zeta)), cmath.phase(zeta) + TWO_PI * int(branch))
