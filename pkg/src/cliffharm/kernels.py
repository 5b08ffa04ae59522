"""Poisson kernels, Newtonian kernels and the Clifford fundamental solution.

The half-space constant a_n and the Newtonian constant b_n are calibrated
numerically from their defining identities; the known closed forms are kept
alongside for comparison only.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DimensionError, DomainError, ParseError, PreconditionError, SingularityError
from .exprs import compile_field
from .multivector import Multivector
from .quadrature import (
    adaptive_gauss,
    composite_gauss,
    gauss_legendre,
    graded_breaks,
    householder_to,
    sphere_area,
    sphere_rule,
)

SPHERE_TOL = 1e-10
NEAR_BOUNDARY = 1e-3


# constants

def halfspace_constant_closed(n: int) -> float:
    """Gamma((n+1)/2) / pi^{(n+1)/2}; reference value only."""
    return math.gamma((n + 1) / 2) / math.pi ** ((n + 1) / 2)


def newtonian_constant_closed(n: int) -> float:
    """1/(2 pi) for n = 2 and 1/((n-2) nu_{n-1}) above; reference value only."""
    if n < 2:
        raise DimensionError("b_n is defined for n >= 2")
    return 1.0 / (2.0 * math.pi) if n == 2 else 1.0 / ((n - 2) * sphere_area(n))


def calibrate_halfspace_constant(n: int, nodes: int = 64) -> float:
    """Choose a_n so the kernel integrates to one.

    With y = t tan(theta) w the mass of the kernel is
    a_n nu_{n-1} int_0^{pi/2} sin^{n-1}, independent of t.
    """
    th, w = gauss_legendre(nodes, 0.0, math.pi / 2)
    return 1.0 / (sphere_area(n) * float(np.sum(w * np.sin(th) ** (n - 1))))


def _radial_bump_laplacian(u, n):
    # phi = (1 - |x|^2)^4, Laplacian of rho(|x|^2) is 4 u rho'' + 2 n rho'
    return 48.0 * u * (1.0 - u) ** 2 - 8.0 * n * (1.0 - u) ** 3


def calibrate_newtonian_constant(n: int) -> float:
    """Choose b_n so that int N_n Lap(phi) = phi(0) for phi = (1 - |x|^2)^4."""
    if n < 2:
        raise DimensionError("b_n is defined for n >= 2")
    r, w = composite_gauss(graded_breaks(0.0, 1.0, levels=40), 16)
    g = np.log(r) if n == 2 else -(r ** (2.0 - n))
    integral = sphere_area(n) * float(np.sum(w * g * _radial_bump_laplacian(r * r, n) * r ** (n - 1)))
    return 1.0 / integral


@dataclass(frozen=True)
class KernelConstants:
    n: int
    nu: float
    a_n: float
    b_n: float | None
    provenance: dict = field(default_factory=dict)

    def closed_forms(self) -> dict:
        out = {"nu": sphere_area(self.n), "a_n": halfspace_constant_closed(self.n)}
        if self.n >= 2:
            out["b_n"] = newtonian_constant_closed(self.n)
        return out

    def to_dict(self) -> dict:
        ref = self.closed_forms()
        out = {"n": self.n}
        for key in ("nu", "a_n", "b_n"):
            value = getattr(self, key)
            if value is None:
                continue
            out[key] = {"value": value, "provenance": self.provenance[key], "closed_form": ref[key]}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


@lru_cache(maxsize=None)
def kernel_constants(n: int) -> KernelConstants:
    if n < 1:
        raise DimensionError("dimension must be positive")
    b = calibrate_newtonian_constant(n) if n >= 2 else None
    prov = {"nu": "closed-form", "a_n": "calibrated", "b_n": "calibrated"}
    return KernelConstants(n, sphere_area(n), calibrate_halfspace_constant(n), b, prov)


# kernels

def _points(x):
    x = np.asarray(x, dtype=float)
    return x[None, :] if x.ndim == 1 else x


def poisson_ball(x, y, n: int | None = None):
    """(1/nu_{n-1}) (1 - |x|^2) / |x - y|^n for |x| < 1 and y on the sphere.

    ``y`` may be a single point or an (m, n) array; the result has matching
    shape.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = n or x.shape[-1]
    if x.shape[-1] != n or y.shape[-1] != n:
        raise DimensionError(f"points must have {n} coordinates")
    r2 = float(x @ x)
    if r2 >= 1.0:
        raise DomainError("Poisson kernel needs |x| < 1")
    if np.any(np.abs(np.linalg.norm(y, axis=-1) - 1.0) > SPHERE_TOL):
        raise PreconditionError("boundary point is not on the unit sphere")
    d = np.linalg.norm(x - y, axis=-1)
    out = (1.0 - r2) / (sphere_area(n) * d**n)
    return float(out) if np.ndim(out) == 0 else out


def poisson_halfspace(x, t, n: int | None = None):
    """a_n t / (|x|^2 + t^2)^{(n+1)/2}; ``x`` may be an (m, n) array."""
    x = np.asarray(x, dtype=float)
    n = n or x.shape[-1]
    if x.shape[-1] != n:
        raise DimensionError(f"points must have {n} coordinates")
    t = float(t)
    if not t > 0:
        raise DomainError("half-space kernel needs t > 0")
    a = kernel_constants(n).a_n
    out = a * t / (np.sum(x * x, axis=-1) + t * t) ** ((n + 1) / 2)
    return float(out) if np.ndim(out) == 0 else out


def newtonian(x, n: int | None = None):
    """N_1 = |x|/2, N_2 = b_2 log|x|, N_n = -b_n |x|^{2-n}."""
    x = np.asarray(x, dtype=float)
    n = n or x.shape[-1]
    if x.shape[-1] != n:
        raise DimensionError(f"points must have {n} coordinates")
    r = np.linalg.norm(x, axis=-1)
    if n == 1:
        out = 0.5 * r
    else:
        if np.any(r == 0):
            raise SingularityError("Newtonian kernel is singular at the origin")
        b = kernel_constants(n).b_n
        out = b * np.log(r) if n == 2 else -b * r ** (2.0 - n)
    return float(out) if np.ndim(out) == 0 else out


def clifford_fundamental_array(x):
    """Vector coefficients x_j / |x|^n for an (m, n) array of points."""
    x = _points(x)
    r = np.linalg.norm(x, axis=1)
    if np.any(r == 0):
        raise SingularityError("Clifford fundamental solution is singular at the origin")
    return x / r[:, None] ** x.shape[1]


def clifford_fundamental(x, n: int | None = None) -> Multivector:
    x = np.asarray(x, dtype=float)
    if n is not None and x.shape[0] != n:
        raise DimensionError(f"point must have {n} coordinates")
    return Multivector.vector(clifford_fundamental_array(x)[0])


# boundary data

def _sphere_angles(pts):
    """(theta,) for n = 2, (polar, azimuth) for n = 3; azimuth in [0, 2 pi)."""
    n = pts.shape[1]
    if n == 2:
        return (np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi),)
    polar = np.arccos(np.clip(pts[:, 2] / np.linalg.norm(pts, axis=1), -1.0, 1.0))
    return polar, np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi)


@dataclass(frozen=True)
class BoundaryFunction:
    """Boundary data on S^{n-1} (``domain="sphere"``) or R^n (``domain="plane"``).

    ``func`` maps an (m, n) array of points to m values. ``bound`` is a
    declared sup |f|, required in spirit for half-space use.
    """

    func: Callable[[np.ndarray], np.ndarray]
    n: int
    domain: str = "sphere"
    bound: float | None = None
    description: str = ""

    def __call__(self, pts):
        pts = _points(pts)
        if pts.shape[1] != self.n:
            raise DimensionError(f"boundary function takes {self.n} coordinates")
        return np.asarray(self.func(pts), dtype=float).reshape(pts.shape[0])

    @classmethod
    def constant(cls, n, value=1.0, domain="sphere"):
        return cls(lambda p: np.full(p.shape[0], float(value)), n, domain, abs(float(value)), repr(value))

    @classmethod
    def from_expression(cls, text, n, domain="sphere", bound=None):
        if n == 1:
            # plain x is accepted as a synonym on the line
            g = compile_field(text, ["x1", "x"])
            fn = lambda p: g(np.column_stack([p[:, 0], p[:, 0]]))  # noqa: E731
        else:
            fn = compile_field(text, [f"x{j}" for j in range(1, n + 1)])
        return cls(fn, n, domain, bound, text)

    @classmethod
    def from_table(cls, columns, values, n, domain="sphere"):
        """Piecewise-linear interpolation of tabulated data.

        Sphere tables are parameterized by angle: ``x1`` (values at +-1) for
        n = 1, ``theta`` for n = 2, ``theta, phi`` (polar, azimuth) for n = 3.
        Plane tables use ``x1..xn`` on a full tensor grid and are held
        constant outside it.
        """
        columns = [np.asarray(c, dtype=float) for c in columns]
        values = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(values)):
            raise ParseError("table values must be finite")
        bound = float(np.max(np.abs(values)))
        if domain == "sphere" and n == 1:
            lookup = {float(a): v for a, v in zip(columns[0], values)}
            if set(lookup) != {1.0, -1.0}:
                raise ParseError("n = 1 sphere table needs rows at x1 = 1 and x1 = -1")
            return cls(lambda p: np.where(p[:, 0] > 0, lookup[1.0], lookup[-1.0]), 1, domain, bound, "table")
        if domain == "sphere" and n == 2:
            order = np.argsort(columns[0])
            th, v = np.mod(columns[0][order], 2 * np.pi), values[order]
            return cls(lambda p: np.interp(_sphere_angles(p)[0], th, v, period=2 * np.pi), 2, domain, bound, "table")
        if domain == "sphere" and n == 3:
            axes, grid = _tensor_grid(columns, values)
            polar, az = axes
            az_ext = np.concatenate([az, [az[0] + 2 * np.pi]])
            grid = np.concatenate([grid, grid[:, :1]], axis=1)
            interp = _grid_interpolator((polar, az_ext), grid)

            def fn(p):
                a, b = _sphere_angles(p)
                b = np.where(b < az[0], b + 2 * np.pi, b)
                return interp(np.column_stack([a, b]))

            return cls(fn, 3, domain, bound, "table")
        if domain == "plane":
            axes, grid = _tensor_grid(columns, values)
            interp = _grid_interpolator(axes, grid)
            return cls(interp, n, domain, bound, "table")
        raise DimensionError(f"no table layout for a {domain} boundary with n = {n}")

    @classmethod
    def read_csv(cls, text, n, domain="sphere"):
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].lstrip().startswith("#")]
        if len(rows) < 2:
            raise ParseError("boundary table needs a header and at least one row")
        header = [h.strip() for h in rows[0]]
        expected = _table_header(n, domain)
        if header != expected:
            raise ParseError(f"boundary table header must be {','.join(expected)}")
        try:
            data = np.array([[float(v) for v in r] for r in rows[1:]])
        except ValueError as exc:
            raise ParseError(f"non-numeric entry in boundary table: {exc}") from None
        if data.shape[1] != len(header):
            raise ParseError("ragged boundary table")
        return cls.from_table(list(data[:, :-1].T), data[:, -1], n, domain)


def _table_header(n, domain):
    if domain == "sphere" and n == 2:
        return ["theta", "value"]
    if domain == "sphere" and n == 3:
        return ["theta", "phi", "value"]
    return [f"x{j}" for j in range(1, n + 1)] + ["value"]


def _tensor_grid(columns, values):
    axes = [np.unique(c) for c in columns]
    shape = tuple(len(a) for a in axes)
    if int(np.prod(shape)) != len(values):
        raise ParseError("table does not form a full tensor grid")
    grid = np.full(shape, np.nan)
    idx = tuple(np.searchsorted(a, c) for a, c in zip(axes, columns))
    grid[idx] = values
    if np.any(np.isnan(grid)):
        raise ParseError("table does not form a full tensor grid")
    return axes, grid


def _grid_interpolator(axes, grid):
    from scipy.interpolate import RegularGridInterpolator

    if any(len(a) < 2 for a in axes):
        raise ParseError("each table axis needs at least two values")
    rgi = RegularGridInterpolator(axes, grid, method="linear")
    lo = np.array([a[0] for a in axes])
    hi = np.array([a[-1] for a in axes])
    return lambda p: rgi(np.clip(p, lo, hi))


def _as_boundary(f, n, domain):
    if isinstance(f, BoundaryFunction):
        if f.n != n:
            raise DimensionError(f"boundary function has n = {f.n}, point has n = {n}")
        return f
    return BoundaryFunction(f, n, domain)


# harmonic extension

def _ball_nodes(n, rx, tol):
    """Node count so the kernel peak at distance 1 - |x| is resolved."""
    if rx == 0.0:
        return {2: 64, 3: 16}.get(n, 20000)
    if n == 2:
        # trapezoid error ~ |x|^M for the circle kernel
        m = math.ceil(math.log(tol) / math.log(rx)) + 16 if rx < 1 else 1 << 16
        return int(min(max(m, 64), 1 << 16))
    # Gauss-Legendre in z = cos(angle to x); nearest singularity sits at
    # z = 1 + (1-|x|)^2/(2|x|), Bernstein ellipse parameter ~ 1 + (1-|x|)/sqrt|x|
    delta = (1.0 - rx) ** 2 / (2.0 * rx)
    rho = 1.0 + delta + math.sqrt(delta * (2.0 + delta))
    m = math.ceil(-math.log(tol) / (2.0 * math.log(rho))) + 8
    return int(min(max(m, 16), 4096))


def _ball_rule_at(n, x, rx, nodes):
    if n == 1:
        return sphere_rule(1)
    if n == 2:
        # start the trapezoid at the kernel peak
        base = math.atan2(x[1], x[0]) if rx > 0 else 0.0
        th = base + 2.0 * np.pi * np.arange(nodes) / nodes
        return np.column_stack([np.cos(th), np.sin(th)]), np.full(nodes, 2.0 * np.pi / nodes)
    if n == 3:
        z, wz = gauss_legendre(nodes)
        m_phi = max(64, 2 * min(nodes, 32))
        phi = 2.0 * np.pi * np.arange(m_phi) / m_phi
        s = np.sqrt(1.0 - z**2)
        pts = np.stack(
            [np.outer(s, np.cos(phi)), np.outer(s, np.sin(phi)), np.outer(z, np.ones(m_phi))], axis=-1
        ).reshape(-1, 3)
        w = np.outer(wz, np.full(m_phi, 2.0 * np.pi / m_phi)).ravel()
        if rx > 0:
            H = householder_to(x / rx)
            pts = pts @ H.T
        return pts, w
    return sphere_rule(n, nodes)


def harmonic_extension_ball(f, x, nodes: int | None = None, tol: float = 1e-13, return_info: bool = False):
    """h(x) = int_{S^{n-1}} P(x, y) f(y) dy by quadrature.

    Node counts grow as x approaches the sphere; points with 1 - |x| < 1e-3
    are evaluated but flagged as ``near_boundary`` in the info dict. For
    n = 2, 3 the rule is compared with one of twice the size; on the circle
    a disagreement beyond ``tol`` (rough data) switches to adaptive
    quadrature in the angle. The info dict reports the final estimate.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    f = _as_boundary(f, n, "sphere")
    rx = float(np.linalg.norm(x))
    if rx >= 1.0:
        raise DomainError("harmonic extension needs |x| < 1")
    m = int(nodes) if nodes else _ball_nodes(n, rx, tol)

    def rule(m):
        pts, w = _ball_rule_at(n, x, rx, m)
        kern = (1.0 - rx * rx) / (sphere_area(n) * np.linalg.norm(x - pts, axis=1) ** n)
        vals = f(pts)
        return float(np.sum(w * kern * vals)), len(w), float(np.max(np.abs(vals)))

    value, used, scale = rule(m)
    err = 0.0
    if n in (2, 3) and not nodes:
        # the node count resolves the kernel; a doubled rule exposes rough data
        fine, used2, _ = rule(2 * m)
        err = abs(fine - value)
        value, used = fine, used + used2
        if n == 2 and err > tol * max(1.0, scale):
            value, err, used = _ball_adaptive_circle(f, x, rx, tol * max(1.0, scale))
    if not return_info:
        return value
    return value, {"nodes": int(used), "error_estimate": err, "near_boundary": bool(1.0 - rx < NEAR_BOUNDARY)}


def _ball_adaptive_circle(f, x, rx, atol):
    """Angular integral on the circle for data with kinks or jumps."""
    base = math.atan2(x[1], x[0]) if rx > 0 else 0.0
    count = [0]

    def g(th):
        y = np.column_stack([np.cos(base + th), np.sin(base + th)])
        count[0] += len(th)
        return (1.0 - rx * rx) / (2.0 * np.pi * np.sum((x - y) ** 2, axis=1)) * f(y)

    value, err = adaptive_gauss(g, 0.0, 2.0 * np.pi, atol, breaks=np.linspace(0.0, 2.0 * np.pi, 33))
    return value, err, count[0]


def ball_kernel_mass(x, nodes: int | None = None) -> float:
    """Quadrature of P(x, .) over the sphere; equals one."""
    return harmonic_extension_ball(BoundaryFunction.constant(len(x)), x, nodes)


def harmonic_extension_halfspace(
    f,
    x,
    t: float,
    tol: float = 1e-10,
    directions: int | None = None,
    truncation: float | None = None,
    return_info: bool = False,
):
    """h(x, t) = int P(x - y, t) f(y) dy for bounded f.

    Rays y = x + t tan(theta) w turn the kernel weight into
    a_n sin^{n-1}(theta) dtheta dw. The theta range stops at the angle whose
    tail mass, times the bound C, is below tol/2 (i.e. |y - x| <= R). An
    explicit ``truncation`` radius R overrides that choice; the info dict
    then reports the resulting tail bound. The theta integral is adaptive
    bisection, which copes with jumps in f along the rays.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.shape[0]
    t = float(t)
    if not t > 0:
        raise DomainError("half-space extension needs t > 0")
    f = _as_boundary(f, n, "plane")
    K = kernel_constants(n)
    directions = directions or {1: 2, 2: 64, 3: 12}.get(n, 4000)
    om, wom = sphere_rule(n, directions)

    def cut(C):
        if truncation is not None:
            if not truncation > 0:
                raise PreconditionError("truncation radius must be positive")
            return math.pi / 2 - math.atan(truncation / t)
        return min(0.1, tol / (2.0 * max(C, 1e-300) * K.a_n * K.nu))

    # scan the rays once to check the bound (or detect growth without one)
    delta = cut(f.bound if f.bound is not None else 1.0)
    pts, radius = _halfspace_scan(x, t, delta, om)
    vals = f(pts)
    if not np.all(np.isfinite(vals)):
        raise PreconditionError("boundary function is not finite on the sampled plane")
    sup = float(np.max(np.abs(vals)))
    if f.bound is not None:
        C = f.bound
        if sup > C * (1.0 + 1e-9) + 1e-12:
            raise PreconditionError(f"boundary function exceeds its declared bound {C}")
    else:
        ray = np.repeat(radius, len(om))
        near = np.abs(vals[ray <= 10.0 * (1.0 + t)])
        far = np.abs(vals[ray >= 1e4 * (1.0 + t)])
        ref = float(np.max(near)) if near.size else 0.0
        if far.size and float(np.max(far)) > 1e3 * (1.0 + ref):
            raise PreconditionError("boundary function appears unbounded; declare a bound")
        C = sup
        delta = cut(C)
    theta_max = math.pi / 2 - delta

    def g(th):
        pts = x[None, None, :] + (t * np.tan(th))[:, None, None] * om[None, :, :]
        vals = f(pts.reshape(-1, n)).reshape(len(th), len(om))
        return np.sin(th) ** (n - 1) * (vals @ wom)

    integral, err = adaptive_gauss(g, 0.0, theta_max, 0.25 * tol / K.a_n, breaks=np.linspace(0.0, theta_max, 33))
    if K.a_n * err > max(1e-6, tol):
        raise ConvergenceError(f"half-space quadrature error estimate {K.a_n * err:.3g} exceeds tolerance")
    value = K.a_n * integral
    if not return_info:
        return value
    return value, {
        "truncation_radius": t * math.tan(theta_max),
        "bound": C,
        "tail_bound": C * K.a_n * K.nu * delta,
        "quadrature_error": K.a_n * err,
    }


def _halfspace_scan(x, t, delta, om, panels=48):
    theta_max = math.pi / 2 - delta
    uniform = np.linspace(0.0, theta_max, panels + 1)
    tail = theta_max - (theta_max - uniform[-2]) * 0.5 ** np.arange(1, 30)
    th, _ = composite_gauss(np.concatenate([uniform[:-1], tail[::-1], [theta_max]]), 4)
    radius = t * np.tan(th)
    pts = x[None, None, :] + radius[:, None, None] * om[None, :, :]
    return pts.reshape(-1, len(x)), radius


def halfspace_kernel_mass(n: int, t: float, radius_factor: float = 200.0, order: int = 16) -> float:
    """Radial quadrature of P(., t) over |x| <= R plus the analytic tail.

    Independent of the ray substitution used for extension: it integrates
    nu_{n-1} r^{n-1} P(r, t) dr on graded panels and adds
    a_n nu t (1/R - (n+1) t^2 / (6 R^3)) for |x| > R.
    """
    t = float(t)
    if not t > 0:
        raise DomainError("half-space kernel needs t > 0")
    K = kernel_constants(n)
    R = radius_factor * t
    breaks = np.concatenate([[0.0], t * np.geomspace(1e-3, radius_factor, 80)])
    r, w = composite_gauss(breaks, order)
    body = K.nu * float(np.sum(w * r ** (n - 1) * K.a_n * t / (r * r + t * t) ** ((n + 1) / 2)))
    tail = K.a_n * K.nu * t * (1.0 / R - (n + 1) * t * t / (6.0 * R**3))
    return body + tail


def extension_grid_csv(points, values, flags=None) -> str:
    """CSV with point coordinates, the value, and an optional flag column."""
    points = _points(points)
    n = points.shape[1]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = [f"x{j}" for j in range(1, n + 1)] + ["value"]
    if flags is not None:
        header.append("near_boundary")
    writer.writerow(header)
    for i, (p, v) in enumerate(zip(points, values)):
        row = [format(float(c), ".17g") for c in p] + [format(float(v), ".17g")]
        if flags is not None:
            row.append(str(int(bool(flags[i]))))
        writer.writerow(row)
    return buf.getvalue()
