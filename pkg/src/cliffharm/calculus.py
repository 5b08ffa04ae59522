"""Finite-difference operators, mean-value checks, radial bumps and weak forms.

Fields are vectorized callables on (m, n) point arrays with a domain
(``Box``, ``Ball`` or the whole space) and a difference step ``h``. Grid
fields interpolate their samples, so stencils centred on grid nodes reduce
to classical central differences.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BoundaryError, DimensionError, DomainError, ParseError, PreconditionError
from .exprs import compile_field
from .multivector import Multivector, product_arrays
from .quadrature import (
    ball_rule,
    composite_gauss,
    gauss_legendre,
    sphere_area,
    sphere_rule,
    weighted_mean,
)

DEFAULT_H = 1e-3


# domains

@dataclass(frozen=True)
class Whole:
    def contains_ball(self, center, radius) -> bool:
        return True


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def contains_ball(self, center, radius) -> bool:
        c = np.asarray(center, dtype=float)
        return bool(np.all(c - radius >= np.asarray(self.lo) - 1e-12) and np.all(c + radius <= np.asarray(self.hi) + 1e-12))


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def contains_ball(self, center, radius) -> bool:
        d = np.linalg.norm(np.asarray(center, dtype=float) - np.asarray(self.center, dtype=float))
        return bool(d + radius <= self.radius + 1e-12)


WHOLE = Whole()


def _pts(x):
    x = np.asarray(x, dtype=float)
    return x[None, :] if x.ndim == 1 else x


# fields

@dataclass(frozen=True)
class ScalarField:
    """Real or complex function on a domain in R^n, vectorized over points."""

    func: Callable[[np.ndarray], np.ndarray]
    n: int
    domain: object = WHOLE
    h: float = DEFAULT_H

    def __post_init__(self):
        if not self.h > 0:
            raise PreconditionError("difference step must be positive")

    def __call__(self, pts):
        pts = _pts(pts)
        if pts.shape[1] != self.n:
            raise DimensionError(f"field takes {self.n} coordinates, got {pts.shape[1]}")
        out = np.asarray(self.func(pts))
        if out.dtype.kind not in "fc":
            out = out.astype(float)
        return np.broadcast_to(out, (pts.shape[0],))

    def at(self, x):
        v = self(x)[0]
        return complex(v) if np.iscomplexobj(v) else float(v)

    @classmethod
    def from_expression(cls, text, n, domain=WHOLE, h=DEFAULT_H):
        return cls(compile_field(text, [f"x{j}" for j in range(1, n + 1)]), n, domain, h)

    @classmethod
    def from_polynomial(cls, p, domain=WHOLE, h=DEFAULT_H):
        return cls(lambda pts: p(pts), p.n, domain, h)

    def map(self, alpha):
        return ScalarField(lambda pts: alpha(self.func(pts)), self.n, self.domain, self.h)


@dataclass(frozen=True)
class GridField(ScalarField):
    """Samples on a uniform tensor grid, interpolated by tensor-product cubic splines."""

    origin: tuple = ()
    spacing: float = 1.0
    values: np.ndarray = field(default=None, repr=False)

    @classmethod
    def from_values(cls, origin, spacing, values):
        from scipy.interpolate import NdBSpline, RegularGridInterpolator, make_interp_spline

        values = np.asarray(values, dtype=float)
        origin = tuple(float(o) for o in origin)
        n = values.ndim
        if len(origin) != n:
            raise DimensionError("origin and grid dimension differ")
        if not spacing > 0:
            raise PreconditionError("grid spacing must be positive")
        if not np.all(np.isfinite(values)):
            raise PreconditionError("grid samples must be finite")
        axes = [o + spacing * np.arange(s) for o, s in zip(origin, values.shape)]
        box = Box(tuple(a[0] for a in axes), tuple(a[-1] for a in axes))
        if min(values.shape) < 4:
            interp = RegularGridInterpolator(axes, values, method="linear")
            return cls(interp, n, box, float(spacing), origin, float(spacing), values)
        # tensor-product not-a-knot cubic spline, exact on cubic polynomials
        c, knots = values, []
        for j, ax in enumerate(axes):
            spl = make_interp_spline(ax, c, k=3, axis=j)
            c = np.moveaxis(spl.c, 0, j)
            knots.append(spl.t)
        interp = NdBSpline(tuple(knots), c, 3)
        return cls(interp, n, box, float(spacing), origin, float(spacing), values)

    @classmethod
    def sample(cls, f, origin, spacing, shape):
        axes = [o + spacing * np.arange(s) for o, s in zip(origin, shape)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(shape))
        return cls.from_values(origin, spacing, np.asarray(f(mesh), dtype=float).reshape(shape))

    def node_points(self):
        axes = [o + self.spacing * np.arange(s) for o, s in zip(self.origin, self.values.shape)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"i{j}" for j in range(1, self.n + 1)] + ["value"])
        for idx in np.ndindex(self.values.shape):
            w.writerow([*idx, format(float(self.values[idx]), ".17g")])
        return buf.getvalue()

    def sidecar(self) -> str:
        return json.dumps({"origin": list(self.origin), "spacing": self.spacing, "shape": list(self.values.shape)}, sort_keys=True)

    @classmethod
    def from_csv(cls, text, sidecar):
        meta = json.loads(sidecar)
        shape = tuple(int(s) for s in meta["shape"])
        values = np.full(shape, np.nan)
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        for r in rows[1:]:
            try:
                idx = tuple(int(v) for v in r[:-1])
                values[idx] = float(r[-1])
            except (ValueError, IndexError) as exc:
                raise ParseError(f"bad grid row {r!r}: {exc}") from None
        if np.any(np.isnan(values)):
            raise ParseError("grid CSV does not cover the declared shape")
        return cls.from_values(meta["origin"], float(meta["spacing"]), values)


@dataclass(frozen=True)
class CliffordField:
    """C(n)-valued field; ``func`` maps (m, n) points to (m, 2^n) coefficients."""

    func: Callable[[np.ndarray], np.ndarray]
    n: int
    domain: object = WHOLE
    h: float = DEFAULT_H

    def __call__(self, pts):
        pts = _pts(pts)
        out = np.asarray(self.func(pts), dtype=float)
        if out.shape != (pts.shape[0], 1 << self.n):
            raise DimensionError(f"Clifford field must return {1 << self.n} components per point")
        return out

    def at(self, x) -> Multivector:
        return Multivector(self.n, self(x)[0])

    @classmethod
    def from_scalar(cls, f: ScalarField):
        def fn(pts):
            out = np.zeros((pts.shape[0], 1 << f.n))
            out[:, 0] = f(pts).real
            return out

        return cls(fn, f.n, f.domain, f.h)

    @classmethod
    def from_vector(cls, g, n, domain=WHOLE, h=DEFAULT_H):
        """Grade-1 field sum_j g_j(x) e_j from an (m, n) -> (m, n) map."""

        def fn(pts):
            out = np.zeros((pts.shape[0], 1 << n))
            out[:, [1 << j for j in range(n)]] = g(pts)
            return out

        return cls(fn, n, domain, h)


def as_clifford(f):
    return f if isinstance(f, CliffordField) else CliffordField.from_scalar(f)


# finite differences

def _check_stencil(f, x, reach):
    if not f.domain.contains_ball(x, reach):
        raise BoundaryError(f"stencil of radius {reach:g} around {list(np.round(x, 12))} leaves the domain")


def _partials(f, x, h=None):
    """Central first differences; rows are d/dx_j of f's values at x."""
    x = np.asarray(x, dtype=float)
    h = h or f.h
    n = f.n
    _check_stencil(f, x, 2 * h)
    E = np.eye(n) * h
    vals = f(np.concatenate([x + E, x - E]))
    return (vals[:n] - vals[n:]) / (2 * h)


def fd_gradient(f: ScalarField, x, h=None) -> np.ndarray:
    return _partials(f, x, h)


def fd_laplacian(f: ScalarField, x, h=None):
    x = np.asarray(x, dtype=float)
    h = h or f.h
    n = f.n
    _check_stencil(f, x, 2 * h)
    E = np.eye(n) * h
    vals = f(np.concatenate([x[None, :], x + E, x - E]))
    out = (np.sum(vals[1:]) - 2 * n * vals[0]) / (h * h)
    return complex(out) if np.iscomplexobj(out) else float(out)


def _gen_arrays(n):
    G = np.zeros((n, 1 << n))
    G[np.arange(n), [1 << j for j in range(n)]] = 1.0
    return G


def dirac_left(F, x, h=None) -> Multivector:
    """sum_j e_j dF/dx_j by central differences."""
    F = as_clifford(F)
    d = _partials(F, x, h)
    return Multivector(F.n, np.sum(product_arrays(_gen_arrays(F.n), d, F.n), axis=0))


def dirac_right(F, x, h=None) -> Multivector:
    F = as_clifford(F)
    d = _partials(F, x, h)
    return Multivector(F.n, np.sum(product_arrays(d, _gen_arrays(F.n), F.n), axis=0))


def dirac_field(F, side="left", h=None) -> CliffordField:
    """The field x -> D F(x), so the operator can be applied twice."""
    F = as_clifford(F)
    h = h or F.h
    G = _gen_arrays(F.n)
    n = F.n

    def fn(pts):
        E = np.eye(n) * h
        plus = F(np.concatenate([pts + E[j] for j in range(n)]))
        minus = F(np.concatenate([pts - E[j] for j in range(n)]))
        d = ((plus - minus) / (2 * h)).reshape(n, pts.shape[0], -1)
        prod = product_arrays(G[:, None, :], d, n) if side == "left" else product_arrays(d, G[:, None, :], n)
        return prod.sum(axis=0)

    return CliffordField(fn, n, _shrunk(F.domain, 2 * h), h)


def _shrunk(domain, margin):
    if isinstance(domain, Box):
        return Box(tuple(np.asarray(domain.lo) + margin), tuple(np.asarray(domain.hi) - margin))
    if isinstance(domain, Ball):
        return Ball(domain.center, domain.radius - margin)
    return domain


def wirtinger(f: ScalarField, x, which: str = "dzbar", h=None) -> complex:
    """d/dz = (d/dx - i d/dy)/2 and d/dzbar = (d/dx + i d/dy)/2 on R^2."""
    if f.n != 2:
        raise DimensionError("Wirtinger derivatives need a field on R^2")
    dx, dy = _partials(f, x, h)
    if which == "dz":
        return complex(0.5 * (dx - 1j * dy))
    if which == "dzbar":
        return complex(0.5 * (dx + 1j * dy))
    raise ValueError("which must be 'dz' or 'dzbar'")


def wirtinger_laplacian(f: ScalarField, x, h=None) -> complex:
    """4 (d/dz)(d/dzbar) f with nested central differences."""
    h = h or f.h
    inner = ScalarField(lambda p: np.array([wirtinger(f, q, "dzbar", h) for q in p]), 2, _shrunk(f.domain, 2 * h), h)
    return 4.0 * wirtinger(inner, x, "dz", h)


def directional_derivative(F, x, v, h=None) -> Multivector:
    F = as_clifford(F)
    v = np.asarray(v, dtype=float)
    return Multivector(F.n, v @ _partials(F, x, h))


def directional_from_orthogonal(F, x, v, h=None) -> Multivector:
    """sum_{j<l} e_j e_l (v_j d_l F - v_l d_j F).

    For a left-holomorphic F this equals the derivative along unit v; it is
    the expansion of v D_L F = 0 with the v-direction separated out.
    """
    F = as_clifford(F)
    v = np.asarray(v, dtype=float)
    d = _partials(F, x, h)
    n = F.n
    out = np.zeros(1 << n)
    for j in range(n):
        for l in range(j + 1, n):
            blade = np.zeros(1 << n)
            blade[(1 << j) | (1 << l)] = 1.0  # e_j e_l, j < l
            out += product_arrays(blade, v[j] * d[l] - v[l] * d[j], n)
    return Multivector(n, out)


# averages

def _check_ball(f, p, r):
    if not r > 0:
        raise DomainError("radius must be positive")
    if not f.domain.contains_ball(p, r):
        raise DomainError(f"closed ball of radius {r:g} at {list(p)} is not inside the domain")


def ball_average(f, p, r, nodes=None):
    p = np.asarray(p, dtype=float)
    _check_ball(f, p, r)
    pts, w = ball_rule(f.n, nodes=nodes)
    return weighted_mean(f(p + r * pts), w)


def sphere_average(f, p, r, nodes=None):
    p = np.asarray(p, dtype=float)
    _check_ball(f, p, r)
    pts, w = sphere_rule(f.n, nodes)
    return weighted_mean(f(p + r * pts), w)


def laplacian_via_averages(f: ScalarField, p, radii: Sequence[float] = (0.1, 0.05, 0.025)) -> float:
    """Richardson extrapolation of 2(n+2)/r^2 (avg_B(p,r) f - f(p)) to r = 0.

    Second-order Taylor expansion gives avg_B f - f(p) = r^2 Lap f(p) / (2(n+2))
    + O(r^4). The quotient is an even series in r, so a polynomial in r^2
    through the sampled radii is evaluated at zero.
    """
    p = np.asarray(p, dtype=float)
    radii = [float(r) for r in radii]
    if len(set(radii)) != len(radii):
        raise ValueError("radii must be distinct")
    f0 = f.at(p)
    q = [2 * (f.n + 2) / r**2 * (ball_average(f, p, r) - f0) for r in radii]
    s = np.array(radii) ** 2
    # Neville at s = 0
    table = list(q)
    for k in range(1, len(s)):
        for i in range(len(s) - k):
            table[i] = (s[i + k] * table[i] - s[i] * table[i + 1]) / (s[i + k] - s[i])
    return float(np.real(table[0]))


@dataclass(frozen=True)
class MeanValueReport:
    point: tuple
    radius: float
    center_value: float
    ball_deviation: float
    sphere_deviation: float

    @property
    def ball_avg(self):
        return self.center_value + self.ball_deviation

    @property
    def sphere_avg(self):
        return self.center_value + self.sphere_deviation

    @property
    def deviation(self):
        return max(abs(self.ball_deviation), abs(self.sphere_deviation))

    def record(self, tol=1e-8) -> dict:
        return {
            "point": list(self.point),
            "radius": self.radius,
            "deviation": self.deviation,
            "verdict": "pass" if self.deviation <= tol else "fail",
        }


def mean_value_check(f: ScalarField, p, r, nodes=None) -> MeanValueReport:
    p = np.asarray(p, dtype=float)
    _check_ball(f, p, r)
    f0 = float(np.real(f.at(p)))
    # average the differences f - f(p) so constants give exactly zero
    shifted = ScalarField(lambda x: np.real(f(x)) - f0, f.n, f.domain, f.h)
    return MeanValueReport(
        tuple(float(v) for v in p),
        float(r),
        f0,
        float(ball_average(shifted, p, r, nodes)),
        float(sphere_average(shifted, p, r, nodes)),
    )


@dataclass(frozen=True)
class SubMeanReport:
    point: tuple
    radius: float
    ball_deviation: float
    sphere_deviation: float

    @property
    def deviation(self):
        """Smaller of the signed ball and sphere deviations."""
        return min(self.ball_deviation, self.sphere_deviation)

    def record(self, tol=1e-8) -> dict:
        return {
            "point": list(self.point),
            "radius": self.radius,
            "deviation": self.deviation,
            "verdict": "pass" if self.deviation >= -tol else "fail",
        }


def sub_mean_value_check(f: ScalarField, p, r, nodes=None) -> SubMeanReport:
    """Signed avg - f(p) over the ball and the sphere; >= 0 when f is subharmonic."""
    m = mean_value_check(f, p, r, nodes)
    return SubMeanReport(m.point, m.radius, m.ball_deviation, m.sphere_deviation)


def sphere_average_profile(f, p, radii, nodes=None) -> np.ndarray:
    """Sphere averages at increasing radii; nondecreasing for subharmonic f."""
    return np.array([float(np.real(sphere_average(f, p, r, nodes))) for r in radii])


@dataclass(frozen=True)
class CompositionReport:
    reports: tuple

    @property
    def min_deviation(self):
        return min(r.deviation for r in self.reports)

    def passed(self, tol=1e-8):
        return self.min_deviation >= -tol


def _check_convex(alpha, lo, hi, samples=65):
    if hi <= lo:
        return
    u = np.linspace(lo, hi, samples)
    a, b = np.meshgrid(u, u)
    lhs = np.asarray(alpha((a + b) / 2), dtype=float)
    rhs = 0.5 * (np.asarray(alpha(a), dtype=float) + np.asarray(alpha(b), dtype=float))
    scale = 1.0 + np.max(np.abs(rhs))
    if np.any(lhs > rhs + 1e-12 * scale):
        raise PreconditionError("alpha fails the midpoint convexity test on the sampled range")


def subharmonic_composition_check(f: ScalarField, alpha, balls, nodes=None) -> CompositionReport:
    """Sub-mean-value checks of alpha o f over the given (p, r) pairs.

    ``alpha`` must be convex on the values f takes at the quadrature nodes.
    """
    vals = []
    for p, r in balls:
        pts, _ = ball_rule(f.n, nodes=nodes)
        vals.append(np.real(f(np.asarray(p, dtype=float) + r * pts)))
        vals.append(np.real(f(np.asarray(p, dtype=float)[None, :])))
    allv = np.concatenate(vals)
    _check_convex(alpha, float(allv.min()), float(allv.max()))
    g = f.map(alpha)
    return CompositionReport(tuple(sub_mean_value_check(g, p, r, nodes) for p, r in balls))


def holomorphic_power_check(f: ScalarField, power: float, balls, nodes=None) -> CompositionReport:
    """Sub-mean-value checks of |f|^power for complex f on R^2."""
    if not power > 0:
        raise PreconditionError("power must be positive")
    g = f.map(lambda v: np.abs(v) ** power)
    return CompositionReport(tuple(sub_mean_value_check(g, p, r, nodes) for p, r in balls))


def mollify(f: ScalarField, p, radius, nodes=None) -> float:
    """int b(x - p) f(x) dx with b a normalized radial bump of the given radius."""
    p = np.asarray(p, dtype=float)
    _check_ball(f, p, radius)
    pts, w = ball_rule(f.n, nodes=nodes)
    b = (1.0 - np.sum(pts * pts, axis=1)) ** 4
    return float(np.real(np.sum(w * b * f(p + radius * pts)) / np.sum(w * b)))


# radial bumps

PANELS = 32
PANEL_ORDER = 16
RHO_PANELS = 4096


def _moment_rule(eps, r):
    return composite_gauss(np.linspace(eps, r, PANELS + 1), PANEL_ORDER)


@dataclass(frozen=True, eq=False)
class BumpFamily:
    """sigma on [eps, r] with the derived theta, rho and phi(x) = rho(|x|^2).

    theta solves 4 u theta' + 2 n theta = sigma, theta = rho', and rho
    vanishes for u >= r, so phi is supported in |x| <= sqrt(r) and
    Laplacian(phi)(x) = sigma(|x|^2).
    """

    sigma: Callable
    eps: float
    r: float
    n: int
    _rho: object = field(repr=False, default=None)
    _cum: np.ndarray = field(repr=False, default=None)

    @property
    def support_radius(self):
        return math.sqrt(self.r)

    def theta(self, u):
        """(1/4) u^{-n/2} int_0^u sigma(t) t^{n/2 - 1} dt."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.zeros_like(u)
        inside = (u > self.eps) & (u < self.r)
        if np.any(inside):
            ui = u[inside]
            width = (self.r - self.eps) / PANELS
            k = np.minimum(((ui - self.eps) / width).astype(int), PANELS - 1)
            a = self.eps + k * width
            x, w = gauss_legendre(PANEL_ORDER)
            half = 0.5 * (ui - a)
            t = a[:, None] + half[:, None] * (x[None, :] + 1.0)
            part = half * np.sum(w * self.sigma(t) * t ** (self.n / 2 - 1), axis=1)
            out[inside] = 0.25 * ui ** (-self.n / 2) * (self._cum[k] + part)
        return out

    def theta_prime(self, u):
        """From the ODE: (sigma - 2 n theta) / (4 u); zero where theta vanishes identically."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.zeros_like(u)
        inside = (u > self.eps) & (u < self.r)
        out[inside] = (self.sigma(u[inside]) - 2 * self.n * self.theta(u[inside])) / (4 * u[inside])
        return out

    def rho(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.zeros_like(u)
        inside = u < self.r
        out[inside] = self._rho(np.maximum(u[inside], 0.0))
        return out

    def phi(self, x):
        x = _pts(x)
        return self.rho(np.sum(x * x, axis=1))

    def laplacian_phi(self, x):
        x = _pts(x)
        u = np.sum(x * x, axis=1)
        out = np.zeros_like(u)
        mask = (u >= self.eps) & (u <= self.r)
        out[mask] = self.sigma(u[mask])
        return out

    def translated(self, p):
        p = np.asarray(p, dtype=float)
        return ScalarField(lambda x: self.phi(x - p), self.n)

    def integral(self) -> float:
        """int phi over R^n by radial quadrature."""
        s, w = composite_gauss(np.linspace(0.0, self.support_radius, 65), PANEL_ORDER)
        return sphere_area(self.n) * float(np.sum(w * s ** (self.n - 1) * self.rho(s * s)))


def _zero_sigma(u):
    return np.zeros_like(np.asarray(u, dtype=float))


def bump_from_sigma(sigma: Callable, eps: float, r: float, n: int) -> BumpFamily:
    """Build theta, rho and phi from sigma supported in [eps, r].

    The weighted moment int sigma(t) t^{n/2-1} dt must vanish. A relative
    defect up to 1e-6 is removed by rescaling the negative part of sigma;
    anything larger is rejected.
    """
    if not 0 < eps < r:
        raise PreconditionError("need 0 < eps < r")
    if n < 1:
        raise DimensionError("dimension must be positive")
    t, w = _moment_rule(eps, r)
    s = np.asarray(sigma(t), dtype=float)
    wt = w * t ** (n / 2 - 1)
    pos = float(np.sum(wt * np.clip(s, 0, None)))
    neg = float(np.sum(wt * np.clip(-s, 0, None)))
    total = pos + neg
    if total == 0.0:
        sig = _zero_sigma
    else:
        defect = abs(pos - neg) / total
        if defect > 1e-6:
            raise PreconditionError(f"moment condition violated (relative defect {defect:.3g})")
        if defect > 1e-10 or pos != neg:
            scale = pos / neg if neg > 0 else 0.0
            base = sigma
            sig = lambda u: np.where(base(u) < 0, scale * base(u), base(u))  # noqa: E731
        else:
            sig = sigma
    sig_vec = _support(sig, eps, r)
    # cumulative weighted integral at the panel starts
    width = (r - eps) / PANELS
    x, gw = gauss_legendre(PANEL_ORDER)
    cum = np.zeros(PANELS)
    acc = 0.0
    for k in range(PANELS):
        a = eps + k * width
        tt = a + 0.5 * width * (x + 1.0)
        cum[k] = acc
        acc += 0.5 * width * float(np.sum(gw * sig_vec(tt) * tt ** (n / 2 - 1)))
    bump = BumpFamily(sig_vec, eps, r, n, None, cum)
    object.__setattr__(bump, "_rho", _rho_spline(bump))
    return bump


def _support(sig, eps, r):
    def fn(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        m = (u >= eps) & (u <= r)
        if np.any(m):
            out[m] = sig(u[m])
        return out

    return fn


def _rho_spline(bump):
    """rho(u) = -int_u^r theta by backward trapezoid sums on RHO_PANELS panels.

    Each panel carries the endpoint derivative correction
    -du^2/12 (theta'(b) - theta'(a)); theta' is available in closed form from
    the ODE, which keeps the values consistent with the slopes fed to the
    Hermite interpolant.
    """
    from scipy.interpolate import CubicHermiteSpline

    u = np.linspace(0.0, bump.r, RHO_PANELS + 1)
    th = bump.theta(u)
    dth = bump.theta_prime(u)
    du = u[1] - u[0]
    pieces = 0.5 * du * (th[:-1] + th[1:]) - du * du / 12.0 * (dth[1:] - dth[:-1])
    rho = np.zeros_like(u)
    rho[:-1] = -np.cumsum(pieces[::-1])[::-1]
    return CubicHermiteSpline(u, rho, th)


def hump(a, b, kind="poly3"):
    """Nonnegative bump supported in [a, b]."""

    def fn(u):
        u = np.asarray(u, dtype=float)
        s = np.clip((u - a) / (b - a), 0.0, 1.0)
        if kind == "poly3":
            return (s * (1 - s)) ** 3
        if kind == "poly4":
            return (s * (1 - s)) ** 4
        if kind == "smooth":
            with np.errstate(divide="ignore", over="ignore"):
                g = np.where((s > 0) & (s < 1), np.exp(-1.0 / np.maximum(s * (1 - s), 1e-300) + 4.0), 0.0)
            return g
        raise ValueError(f"unknown hump kind {kind!r}")

    return fn


def balanced_sigma(eps, r, n, kind="poly3", split=None):
    """A positive hump on [eps, m] and a negative one on [m, r], moment-balanced.

    The balancing factor is computed with the same panel rule the factory
    uses, so the moment condition holds to rounding.
    """
    m = split if split is not None else 0.5 * (eps + r)
    h1, h2 = hump(eps, m, kind), hump(m, r, kind)
    t, w = _moment_rule(eps, r)
    wt = w * t ** (n / 2 - 1)
    c = float(np.sum(wt * h1(t))) / float(np.sum(wt * h2(t)))
    return lambda u: h1(u) - c * h2(u)


SIGMA_FAMILIES = ("poly3", "poly4", "smooth")


def standard_bump(n, kind="poly3", eps=0.05, r=1.0, split=None):
    return bump_from_sigma(balanced_sigma(eps, r, n, kind, split), eps, r, n)


def bump_inside(f, bump, p, eta=None):
    """Restricted support: the support ball sits at distance >= eta from the complement."""
    eta = 2 * f.h if eta is None else eta
    return f.domain.contains_ball(p, bump.support_radius + eta)


def _radial_pairing(f, bump, p, radial_panels=32, nodes=None):
    p = np.asarray(p, dtype=float)
    n = f.n
    s, w = composite_gauss(np.linspace(math.sqrt(bump.eps), bump.support_radius, radial_panels + 1), PANEL_ORDER)
    om, wom = sphere_rule(n, nodes)
    pts = p + (s[:, None, None] * om[None, :, :]).reshape(-1, n)
    weights = np.outer(w * s ** (n - 1) * bump.sigma(s * s), wom).ravel()
    return np.sum(weights * f(pts))


@dataclass(frozen=True)
class WeakTestReport:
    pairings: tuple

    @property
    def max_abs(self):
        return max((abs(v) for v in self.pairings), default=0.0)

    def signs(self):
        return tuple(int(np.sign(np.real(v))) for v in self.pairings)


def weak_harmonic_test(f: ScalarField, bumps, centers, eta=None, nodes=None) -> WeakTestReport:
    """int Laplacian(phi_p) f for every bump and center.

    Laplacian(phi_p)(x) = sigma(|x - p|^2), integrated with Gauss-Legendre in
    the radius times the sphere rule.
    """
    out = []
    for b in bumps:
        if b.n != f.n:
            raise DimensionError("bump and field dimensions differ")
        for p in centers:
            if not bump_inside(f, b, p, eta):
                raise PreconditionError(f"bump at {list(p)} does not have restricted support in the domain")
            out.append(float(np.real(_radial_pairing(f, b, p, nodes=nodes))))
    return WeakTestReport(tuple(out))


def phi_pairing(f: ScalarField, bump: BumpFamily, p, nodes=None) -> float:
    """int phi_p f by radial quadrature."""
    p = np.asarray(p, dtype=float)
    s, w = composite_gauss(np.linspace(0.0, bump.support_radius, 65), PANEL_ORDER)
    om, wom = sphere_rule(f.n, nodes)
    pts = p + (s[:, None, None] * om[None, :, :]).reshape(-1, f.n)
    weights = np.outer(w * s ** (f.n - 1) * bump.rho(s * s), wom).ravel()
    return float(np.real(np.sum(weights * f(pts))))


# fundamental-solution weak identities

def _cell_centers(y, half_width, h, n):
    k = int(math.ceil(half_width / h))
    offs = (np.arange(-k, k) + 0.5) * h
    mesh = np.stack(np.meshgrid(*([offs] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return np.asarray(y, dtype=float) + mesh


DEFAULT_WEAK_H = {1: 1e-3, 2: 1e-2, 3: 2.5e-2}


def newtonian_weak_residual(bump_laplacian, phi_at_0, support, n, y=None, h=None) -> float:
    """int N_n(x - y) Laplacian(phi)(x - y) dx - phi(0) by the midpoint rule.

    ``y`` sits on a cell vertex so no midpoint meets the singularity.
    """
    from .kernels import newtonian

    h = h or DEFAULT_WEAK_H.get(n, 0.05)
    y = np.zeros(n) if y is None else np.asarray(y, dtype=float)
    x = _cell_centers(y, support, h, n)
    d = x - y
    keep = np.sum(d * d, axis=1) <= support**2
    d = d[keep]
    total = float(np.sum(newtonian(d, n) * bump_laplacian(d))) * h**n
    return total - phi_at_0


def polynomial_bump(n):
    """phi = (1 - |x|^2)^4 with its Laplacian; phi(0) = 1."""

    def lap(x):
        u = np.sum(x * x, axis=1)
        return np.where(u < 1, 48.0 * u * (1 - u) ** 2 - 8.0 * n * (1 - u) ** 3, 0.0)

    return lap, 1.0, 1.0


def factory_bump_data(bump: BumpFamily):
    return bump.laplacian_phi, float(bump.rho(0.0)[0]), bump.support_radius


def clifford_weak_constants(n, h=None, support=1.0):
    """Midpoint-rule values of int (D_R phi) E_n and int E_n (D_L phi) for phi = (1 - |x|^2)^4.

    Both are scalar multiples of phi(0) = 1; the pair of scalar parts is
    returned.
    """
    from .kernels import clifford_fundamental_array

    h = h or DEFAULT_WEAK_H.get(n, 0.05)
    x = _cell_centers(np.zeros(n), support, h, n)
    u = np.sum(x * x, axis=1)
    keep = u < support**2
    x, u = x[keep], u[keep]
    grad = (-8.0 * (1 - u) ** 3)[:, None] * x  # gradient of (1 - u)^4
    E = np.zeros((len(x), 1 << n))
    G = np.zeros((len(x), 1 << n))
    idx = [1 << j for j in range(n)]
    E[:, idx] = clifford_fundamental_array(x)
    G[:, idx] = grad
    right = product_arrays(G, E, n).sum(axis=0) * h**n  # (D_R phi) E_n, phi scalar so D_R phi = D_L phi
    left = product_arrays(E, G, n).sum(axis=0) * h**n
    return float(right[0]), float(left[0]), right, left


# Dirichlet energy

def _grid_gradient(values, h):
    """Fourth-order central differences inside, second order at the edges."""
    grads = []
    for axis in range(values.ndim):
        g = np.gradient(values, h, axis=axis, edge_order=2)
        v = np.moveaxis(values, axis, 0)
        gm = np.moveaxis(g, axis, 0)
        if v.shape[0] >= 5:
            gm[2:-2] = (-v[4:] + 8 * v[3:-1] - 8 * v[1:-3] + v[:-4]) / (12 * h)
        grads.append(np.moveaxis(gm, 0, axis))
    return grads


def _trapezoid_weights(shape, h):
    w = np.ones(shape) * h ** len(shape)
    for axis, m in enumerate(shape):
        sl = [slice(None)] * len(shape)
        for end in (0, m - 1):
            sl[axis] = end
            w[tuple(sl)] *= 0.5
    return w


def _grid_of(f):
    if not isinstance(f, GridField):
        raise PreconditionError("Dirichlet energy needs grid fields")
    return f


def dirichlet_pairing(f: GridField, g: GridField) -> float:
    """B(f, g) = int <grad f, grad g> on the shared grid."""
    f, g = _grid_of(f), _grid_of(g)
    if f.values.shape != g.values.shape or f.origin != g.origin or f.spacing != g.spacing:
        raise DimensionError("fields do not share a grid")
    gf = _grid_gradient(f.values, f.spacing)
    gg = _grid_gradient(g.values, g.spacing)
    w = _trapezoid_weights(f.values.shape, f.spacing)
    return float(sum(np.sum(w * a * b) for a, b in zip(gf, gg)))


def dirichlet_energy(f: GridField) -> float:
    return dirichlet_pairing(f, f)


def grid_add(f: GridField, g: GridField) -> GridField:
    if f.values.shape != g.values.shape or f.origin != g.origin or f.spacing != g.spacing:
        raise DimensionError("fields do not share a grid")
    return GridField.from_values(f.origin, f.spacing, f.values + g.values)


# reflection

def schwarz_reflect(h: ScalarField, samples=None, tol: float = 1e-10) -> ScalarField:
    """Odd extension in the last coordinate of a field vanishing on t = 0.

    The trace is checked at ``samples`` (points in R^{n-1}); by default a
    7^{n-1} grid on [-1, 1]^{n-1}.
    """
    n = h.n
    if samples is None:
        axes = [np.linspace(-1, 1, 7)] * (n - 1)
        samples = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n - 1) if n > 1 else np.zeros((1, 0))
    samples = np.asarray(samples, dtype=float).reshape(-1, n - 1)
    trace = h(np.column_stack([samples, np.zeros(len(samples))]))
    if np.max(np.abs(trace)) > tol:
        raise PreconditionError(f"boundary trace is not zero (max {float(np.max(np.abs(trace))):.3g})")

    def fn(pts):
        t = pts[:, -1]
        mirrored = pts.copy()
        mirrored[:, -1] = np.abs(t)
        return np.where(t >= 0, 1.0, -1.0) * h.func(mirrored)

    dom = h.domain
    if isinstance(dom, Box):
        dom = Box(tuple(dom.lo[:-1]) + (-dom.hi[-1],), tuple(dom.hi))
    return ScalarField(fn, n, dom, h.h)
