import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliffharm.calculus import (
    DEFAULT_WEAK_H,
    SIGMA_FAMILIES,
    Ball,
    Box,
    CliffordField,
    GridField,
    ScalarField,
    balanced_sigma,
    bump_from_sigma,
    clifford_weak_constants,
    dirac_field,
    dirac_left,
    dirac_right,
    directional_derivative,
    directional_from_orthogonal,
    dirichlet_energy,
    dirichlet_pairing,
    factory_bump_data,
    fd_gradient,
    fd_laplacian,
    grid_add,
    holomorphic_power_check,
    hump,
    laplacian_via_averages,
    mean_value_check,
    mollify,
    newtonian_weak_residual,
    phi_pairing,
    polynomial_bump,
    schwarz_reflect,
    sphere_average_profile,
    standard_bump,
    sub_mean_value_check,
    subharmonic_composition_check,
    weak_harmonic_test,
    wirtinger,
    wirtinger_laplacian,
)
from cliffharm.errors import BoundaryError, DimensionError, DomainError, PreconditionError
from cliffharm.kernels import clifford_fundamental_array, kernel_constants, newtonian
from cliffharm.multivector import Multivector
from cliffharm.polyharmonic import harmonic_basis
from cliffharm.series import exp_complex


def field(text, n, **kw):
    return ScalarField.from_expression(text, n, **kw)


def sq(n):
    return field(" + ".join(f"x{j}^2" for j in range(1, n + 1)), n)


def e_field(n, h=1e-3):
    return CliffordField.from_vector(clifford_fundamental_array, n, h=h)


# finite differences

@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_laplacian_of_norm_squared(n, rng):
    x = rng.standard_normal(n)
    assert abs(fd_laplacian(sq(n), x) - 2 * n) <= 1e-6
    assert np.allclose(fd_gradient(sq(n), x), 2 * x, atol=1e-9)


def test_laplacian_harmonic_quadratic(rng):
    f = field("x1^2 - x2^2", 2)
    for _ in range(5):
        assert abs(fd_laplacian(f, rng.standard_normal(2))) <= 1e-7


def test_fd_order_two():
    f = field("x1^4", 2, h=1e-2)
    x = np.array([0.7, 0.1])
    errs = [abs(fd_laplacian(f, x, h=h) - 12 * 0.49) for h in (1e-2, 5e-3)]
    assert 3.5 <= errs[0] / errs[1] <= 4.5
    # central differences are exact for d/dz of holomorphic polynomials, so use x^4 + i y^4
    g = ScalarField(lambda p: p[:, 0] ** 4 + 1j * p[:, 1] ** 4, 2)
    exact = 0.5 * (4 * 0.3**3 - 1j * 4j * (-0.4) ** 3)
    errs = [abs(wirtinger(g, [0.3, -0.4], "dz", h=h) - exact) for h in (1e-2, 5e-3)]
    assert 3.5 <= errs[0] / errs[1] <= 4.5
    F = CliffordField.from_scalar(f)
    errs = [abs(dirac_left(F, x, h=h)[1] - 4 * 0.7**3) for h in (1e-2, 5e-3)]
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_boundary_error():
    f = field("x1", 1, domain=Box((0.0,), (1.0,)))
    with pytest.raises(BoundaryError):
        fd_laplacian(f, [0.001])
    assert abs(fd_laplacian(f, [0.5])) <= 1e-9


def test_dirac_examples(rng):
    h = field("x1^2 - x2^2", 2)
    for _ in range(5):
        x = rng.uniform(-1, 1, 2)
        D = dirac_left(h, x)
        assert D.allclose(Multivector.vector([2 * x[0], -2 * x[1]]), atol=1e-9)
        assert D.allclose(dirac_right(h, x), atol=0)
        DD = dirac_left(dirac_field(h), x)
        assert DD.norm() <= 1e-6


@pytest.mark.parametrize("n", [2, 3])
def test_clifford_fundamental_holomorphic(n, rng):
    E = e_field(n)
    for _ in range(50):
        x = rng.standard_normal(n)
        x *= (0.5 + rng.random()) / np.linalg.norm(x)
        C = 50 * np.linalg.norm(x) ** (-n - 2)
        assert dirac_left(E, x).norm() <= C * 1e-6
        assert dirac_right(E, x).norm() <= C * 1e-6


def test_dirac_squares_to_minus_laplacian(rng):
    coeffs = rng.standard_normal((8, 3))

    def F(p):
        x, y, z = p.T
        basis = np.stack([x * x * y, y * z * z, x * z, x**3 - z, y * y, x * y * z, z**3, x * x - y * y], axis=1)
        return basis * 1.0 @ np.diag(coeffs[:, 0]) + 0 * basis

    def lap(p):
        x, y, z = p.T
        return np.stack([2 * y, 2 * y, 0 * x, 6 * x, 2 + 0 * x, 0 * x, 6 * z, 0 * x], axis=1) * coeffs[:, 0]

    fld = CliffordField(F, 3, h=1e-3)
    for _ in range(5):
        x = rng.uniform(-1, 1, 3)
        for side in ("left", "right"):
            D2 = (dirac_left if side == "left" else dirac_right)(dirac_field(fld, side), x)
            assert np.allclose(D2.coeffs, -lap(x[None, :])[0], atol=1e-5)


def test_wirtinger_examples(rng):
    z2 = ScalarField(lambda p: (p[:, 0] + 1j * p[:, 1]) ** 2, 2)
    zbar = ScalarField(lambda p: p[:, 0] - 1j * p[:, 1], 2)
    ex = ScalarField(lambda p: np.array([exp_complex(complex(a, b)) for a, b in p]), 2)
    for _ in range(5):
        x = rng.uniform(-1, 1, 2)
        z = complex(*x)
        assert abs(wirtinger(z2, x, "dzbar")) <= 1e-9
        assert abs(wirtinger(z2, x, "dz") - 2 * z) <= 1e-9
        assert abs(wirtinger(zbar, x, "dzbar") - 1) <= 1e-9
        assert abs(wirtinger(zbar, x, "dz")) <= 1e-9
        assert abs(wirtinger(ex, x, "dz") - exp_complex(z)) <= 10 * 1e-6
    with pytest.raises(ValueError):
        wirtinger(z2, [0, 0], "dx")
    with pytest.raises(DimensionError):
        wirtinger(sq(3), [0, 0, 0])


def test_wirtinger_factorization(rng):
    f = ScalarField(lambda p: np.exp(p[:, 0]) * np.cos(2 * p[:, 1]) + 1j * p[:, 0] ** 2 * p[:, 1], 2, h=1e-3)
    for _ in range(5):
        x = rng.uniform(-1, 1, 2)
        assert abs(wirtinger_laplacian(f, x) - fd_laplacian(f, x)) <= 1e-4


def test_directional_identity(rng):
    for n in (2, 3):
        E = e_field(n)
        for _ in range(10):
            x = rng.standard_normal(n)
            x *= (0.7 + rng.random()) / np.linalg.norm(x)
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            a = directional_derivative(E, x, v)
            b = directional_from_orthogonal(E, x, v)
            assert a.allclose(b, atol=20 * 1e-6 * np.linalg.norm(x) ** (-n - 2))


# averages

def test_laplacian_via_averages(rng):
    assert abs(laplacian_via_averages(field("x1*x2 - x3^2 + x1^2", 3), [0.1, 0.2, 0.3])) <= 1e-9
    for n in (2, 3):
        assert abs(laplacian_via_averages(sq(n), np.zeros(n)) - 2 * n) <= 1e-9
    f = field("x1^4", 2)
    vals = [laplacian_via_averages(f, [0.0, 0.0], radii=(r, r / 2, r / 4)) for r in (0.2, 0.1)]
    assert abs(vals[1]) <= abs(vals[0]) + 1e-12 and abs(vals[1]) <= 1e-12
    g = ScalarField(lambda p: np.exp(p[:, 0]) * np.sin(p[:, 1]), 2)
    assert abs(laplacian_via_averages(field("exp(x1)*x2^2", 2), [0.2, 0.3]) - math.exp(0.2) * (0.09 + 2)) <= 1e-6
    assert abs(laplacian_via_averages(g, [0.2, 0.3])) <= 1e-6


@pytest.mark.parametrize("n", [2, 3])
def test_mean_value_examples(n, rng):
    for _ in range(5):
        p, r = rng.uniform(-1, 1, n), rng.uniform(0.1, 1.0)
        assert mean_value_check(field("x1*x2", n), p, r).deviation <= 1e-8
        assert mean_value_check(field("3", n), p, r).deviation == 0
    for r in (0.3, 0.7, 1.5):
        rep = mean_value_check(sq(n), np.zeros(n), r)
        assert abs(rep.ball_deviation - n / (n + 2) * r * r) <= 1e-8
        assert abs(rep.sphere_deviation - r * r) <= 1e-8
    rec = mean_value_check(sq(n), np.zeros(n), 0.5).record()
    assert rec["verdict"] == "fail"


def test_average_domain_checks():
    f = field("x1", 2, domain=Ball((0.0, 0.0), 1.0))
    with pytest.raises(DomainError):
        mean_value_check(f, [0.5, 0.0], 0.6)
    with pytest.raises(DomainError):
        mean_value_check(f, [0.0, 0.0], 0.0)


def test_sub_mean_value_examples(rng):
    for n in (2, 3):
        rep = sub_mean_value_check(sq(n), np.zeros(n), 0.8)
        assert abs(rep.ball_deviation - n / (n + 2) * 0.64) <= 1e-8 and rep.deviation > 0
        f = field("max(x1, 0)", n)
        for _ in range(10):
            assert sub_mean_value_check(f, rng.uniform(-1, 1, n), rng.uniform(0.05, 1)).deviation >= -1e-8
        h = field("x1*x2 + x1", n)
        assert abs(sub_mean_value_check(h, rng.uniform(-1, 1, n), 0.5).deviation) <= 1e-8


def test_sphere_profile_monotone():
    prof = sphere_average_profile(field("max(x1, 0)", 2), [0.1, 0.0], [0.1, 0.2, 0.4, 0.8], nodes=2048)
    assert np.all(np.diff(prof) >= -1e-9)


def test_composition_examples(rng):
    balls = [(rng.uniform(-1, 1, 2), rng.uniform(0.1, 1)) for _ in range(10)]
    rep = subharmonic_composition_check(field("x1", 2), np.abs, balls)
    assert rep.passed()
    rep = subharmonic_composition_check(field("x1*x2", 2), lambda v: 3 * v + 1, balls)
    assert max(abs(r.deviation) for r in rep.reports) <= 1e-8
    with pytest.raises(PreconditionError):
        subharmonic_composition_check(field("x1", 2), lambda v: -(v**2), balls)
    z2 = ScalarField(lambda p: (p[:, 0] + 1j * p[:, 1]) ** 2, 2)
    assert holomorphic_power_check(z2, 0.5, balls).passed()


def test_mollify_reproduces_harmonic(rng):
    f = field("x1^3 - 3*x1*x2^2 + x2", 2)
    for _ in range(5):
        p = rng.uniform(-1, 1, 2)
        assert abs(mollify(f, p, 0.4) - f.at(p)) <= 1e-10


# bumps

def test_zero_sigma():
    b = bump_from_sigma(lambda u: np.zeros_like(u), 0.1, 1.0, 2)
    u = np.linspace(0, 1.2, 50)
    assert np.all(b.theta(u) == 0) and np.all(b.rho(u) == 0)
    assert np.all(b.phi(np.zeros((3, 2))) == 0)


@pytest.mark.parametrize("kind", SIGMA_FAMILIES)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_bump_ode_and_support(kind, n):
    b = standard_bump(n, kind)
    u = np.linspace(0, 1.2, 1024)
    assert np.max(np.abs(4 * u * b.theta_prime(u) + 2 * n * b.theta(u) - b.sigma(u))) <= 1e-6
    assert np.all(b.theta(u[u <= b.eps]) == 0) and np.all(b.theta(u[u >= b.r]) == 0)
    inner = np.linspace(0, b.eps, 20)
    # rho is constant on [0, eps] and vanishes beyond r
    assert np.ptp(b.rho(inner)) <= 1e-9
    assert np.all(b.rho(u[u >= b.r]) == 0)
    # theta just below r is tiny (the moment condition makes theta(r) = 0)
    assert abs(b.theta(np.array([b.r - 1e-9]))[0]) <= 1e-6


def test_bump_ode_by_finite_differences():
    b = standard_bump(2, "poly4")
    u = np.linspace(0.06, 0.99, 200)
    d = 1e-5
    fd = (b.theta(u + d) - b.theta(u - d)) / (2 * d)
    assert np.max(np.abs(fd - b.theta_prime(u))) <= 1e-6
    rd = (b.rho(u + d) - b.rho(u - d)) / (2 * d)
    assert np.max(np.abs(rd - b.theta(u))) <= 1e-6


@pytest.mark.parametrize("n", [2, 3])
def test_bump_laplacian_matches_sigma(n, rng):
    b = standard_bump(n, "poly3")
    f = ScalarField(b.phi, n, h=1e-3)
    for _ in range(20):
        x = rng.standard_normal(n)
        x *= rng.uniform(0.25, 0.95) / np.linalg.norm(x)
        assert abs(fd_laplacian(f, x) - b.laplacian_phi(x)[0]) <= 1e-4


def test_bump_preconditions():
    with pytest.raises(PreconditionError):
        bump_from_sigma(hump(0.1, 0.5), 0.1, 1.0, 2)
    with pytest.raises(PreconditionError):
        bump_from_sigma(balanced_sigma(0.1, 1.0, 2), 0.0, 1.0, 2)


def test_weak_harmonic_examples(rng):
    bumps = [standard_bump(2, k) for k in SIGMA_FAMILIES]
    centers = [rng.uniform(-1, 1, 2) for _ in range(3)]
    for h in harmonic_basis(2, 3) + harmonic_basis(2, 4):
        f = ScalarField.from_polynomial(h)
        assert weak_harmonic_test(f, bumps, centers).max_abs <= 1e-6
    assert weak_harmonic_test(field("x1", 2), bumps, centers).max_abs <= 1e-6
    for n in (2, 3):
        b = standard_bump(n, "poly3")
        pair = weak_harmonic_test(sq(n), [b], [np.zeros(n)]).pairings[0]
        assert abs(pair - 2 * n * phi_pairing(field("1", n), b, np.zeros(n))) <= 1e-6
        assert abs(pair - 2 * n * b.integral()) <= 1e-6


def test_weak_restricted_support():
    f = field("x1", 2, domain=Box((-1.0, -1.0), (1.0, 1.0)))
    with pytest.raises(PreconditionError):
        weak_harmonic_test(f, [standard_bump(2, r=0.5)], [[0.5, 0.0]])
    assert weak_harmonic_test(f, [standard_bump(2, r=0.25)], [[0.2, 0.0]]).max_abs <= 1e-6


# fundamental solutions

@pytest.mark.parametrize("n", [1, 2, 3])
def test_newtonian_weak_identity(n):
    for data in (polynomial_bump(n), factory_bump_data(standard_bump(n, "poly4"))):
        h = DEFAULT_WEAK_H[n]
        e1 = abs(newtonian_weak_residual(*data, n, h=h))
        e2 = abs(newtonian_weak_residual(*data, n, h=h / 2))
        assert e1 <= 5e-3
        assert e2 <= e1 / 2 or e2 <= 1e-9


def test_newtonian_weak_identity_off_origin():
    lap, p0, s = polynomial_bump(2)
    assert abs(newtonian_weak_residual(lap, p0, s, 2, y=[0.3, -0.7])) <= 5e-3


@pytest.mark.parametrize("n", [2, 3])
def test_clifford_weak_constant(n):
    right, left, R, L = clifford_weak_constants(n)
    assert math.isclose(right, left, rel_tol=1e-12)
    assert abs(right / kernel_constants(n).nu - 1) <= 1e-2
    # only the scalar part survives
    assert np.max(np.abs(R[1:])) <= 1e-9


@pytest.mark.parametrize("n", [2, 3])
def test_e_n_proportional_to_dirac_newtonian(n, rng):
    N = ScalarField(lambda p: newtonian(p, n), n, h=1e-4)
    nu = kernel_constants(n).nu
    for _ in range(50):
        x = rng.standard_normal(n)
        x *= (0.5 + rng.random()) / np.linalg.norm(x)
        D = dirac_left(N, x)
        E = Multivector.vector(clifford_fundamental_array(x)[0])
        assert (nu * D).allclose(E, atol=1e-6)


# Dirichlet energy

def grid(f, h=0.02, lo=-1.0, m=101):
    return GridField.sample(f, (lo, lo), h, (m, m))


def bump_grid(p, rad):
    def f(x):
        u = np.sum((x - p) ** 2, axis=1) / rad**2
        return np.where(u < 1, (1 - u) ** 4, 0.0)

    return grid(f)


def test_dirichlet_examples(rng):
    zero = grid(lambda x: 0 * x[:, 0])
    assert dirichlet_energy(zero) == 0
    h = grid(lambda x: x[:, 0] ** 2 - x[:, 1] ** 2 + x[:, 0])
    for _ in range(10):
        p = rng.uniform(-0.4, 0.4, 2)
        phi = bump_grid(p, 0.5)
        Eh, Ep = dirichlet_energy(h), dirichlet_energy(phi)
        assert abs(dirichlet_pairing(h, phi)) <= 1e-6 * math.sqrt(Eh * Ep)
        total = dirichlet_energy(grid_add(h, phi))
        assert abs(total - Eh - Ep) <= 1e-6 * total
        assert total >= Eh - 1e-6


def test_dirichlet_bilinear(rng):
    f = grid(lambda x: np.sin(x[:, 0]) * x[:, 1])
    g = grid(lambda x: np.exp(x[:, 1]))
    assert math.isclose(dirichlet_pairing(f, g), dirichlet_pairing(g, f), rel_tol=1e-14)
    assert dirichlet_energy(f) > 0
    # energy of x1 on [-1, 1]^2 is the area
    assert abs(dirichlet_energy(grid(lambda x: x[:, 0])) - 4) <= 1e-12
    other = GridField.sample(lambda x: x[:, 0], (0.0, 0.0), 0.02, (101, 101))
    with pytest.raises(DimensionError):
        dirichlet_pairing(f, other)
    with pytest.raises(PreconditionError):
        dirichlet_energy(field("x1", 2))


def test_grid_csv_roundtrip():
    f = GridField.sample(lambda x: x[:, 0] * x[:, 1], (0.0, -1.0), 0.25, (5, 9))
    g = GridField.from_csv(f.to_csv(), f.sidecar())
    assert np.array_equal(g.values, f.values) and g.origin == f.origin
    meta = json.loads(f.sidecar())
    assert meta["shape"] == [5, 9]
    assert abs(g.at([0.6, 0.3]) - 0.18) <= 1e-12


# reflection

def test_schwarz_examples(rng):
    t = ScalarField(lambda p: p[:, 1], 2, Box((-2.0, 0.0), (2.0, 2.0)))
    ext = schwarz_reflect(t)
    pts = rng.uniform(-1.5, 1.5, (20, 2))
    assert np.allclose(ext(pts), pts[:, 1], atol=0)
    assert ext.domain.contains_ball([0.0, 0.0], 1.0)
    xt = schwarz_reflect(ScalarField(lambda p: p[:, 0] * p[:, 1], 2))
    assert np.allclose(xt(pts), pts[:, 0] * pts[:, 1])
    for _ in range(10):
        p = np.array([rng.uniform(-1, 1), rng.uniform(-0.2, 0.2)])
        assert mean_value_check(xt, p, 0.5).deviation <= 1e-8
        assert mean_value_check(ext, p, 0.5).deviation <= 1e-8
    with pytest.raises(PreconditionError):
        schwarz_reflect(ScalarField(lambda p: 1 + p[:, 1], 2))


# properties

@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=5, max_size=5), st.floats(0.05, 1.5))
def test_harmonic_mean_value_property(c, r):
    # harmonic cubic in 3 variables with random coefficients
    expr = f"({c[0]!r})*x1*x2*x3 + ({c[1]!r})*(x1^2 - x2^2) + ({c[2]!r})*(x1^3 - 3*x1*x3^2) + ({c[3]!r})*x2 + ({c[4]!r})"
    f = field(expr, 3)
    assert mean_value_check(f, [0.1, -0.2, 0.3], r).deviation <= 1e-8 * max(1.0, r**3 * 10)


@settings(max_examples=30, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.05, 1.0))
def test_convex_of_harmonic_is_subharmonic(a, b, r):
    f = field("x1^2 - x2^2 + x1", 2)
    rep = subharmonic_composition_check(f, lambda v: np.maximum(v, 0.3) ** 2, [(np.array([a, b]), r)])
    assert rep.passed()
