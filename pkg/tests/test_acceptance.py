"""Acceptance suite: one test per numbered criterion.

Run ``pytest tests/test_acceptance.py -s`` to see the per-criterion lines
printed by the tests; the terminal summary repeats them as PASS/FAIL.
"""

import json
import math
import time

import numpy as np
import pytest
from conftest import random_mv

from cliffharm import calculus, kernels, linalg, moebius, polyharmonic, series
from cliffharm.calculus import (
    DEFAULT_WEAK_H,
    SIGMA_FAMILIES,
    Box,
    CliffordField,
    GridField,
    ScalarField,
    dirac_left,
    dirac_right,
    dirichlet_energy,
    dirichlet_pairing,
    factory_bump_data,
    fd_laplacian,
    grid_add,
    mean_value_check,
    newtonian_weak_residual,
    polynomial_bump,
    schwarz_reflect,
    standard_bump,
    sub_mean_value_check,
    weak_harmonic_test,
)
from cliffharm.cli import main
from cliffharm.kernels import BoundaryFunction
from cliffharm.multivector import Multivector, Quaternion, paravector_inverse
from cliffharm.quadrature import ball_average, sphere_area, sphere_rule

SEED = 20240611


def report(num, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}")
    assert ok, detail


def crit(num, title):
    return pytest.mark.criterion(num, title)


def unit(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


@crit(1, "Clifford algebra laws")
def test_c01_clifford_laws():
    rng = np.random.default_rng(SEED)
    exact = True
    for n in (1, 2, 3, 4):
        for j in range(1, n + 1):
            ej = Multivector.generator(n, j)
            exact &= ej * ej == Multivector.scalar(n, -1)
            for k in range(1, n + 1):
                if k != j:
                    ek = Multivector.generator(n, k)
                    exact &= ej * ek + ek * ej == Multivector.zero(n)
    worst = 0.0
    for i in range(200):
        n = 1 + i % 4
        x, y, z = (random_mv(rng, n) for _ in range(3))
        worst = max(worst, float(np.max(np.abs(((x * y) * z - x * (y * z)).coeffs))))
    hom = 0.0
    for _ in range(200):
        p, q = Quaternion(*rng.standard_normal(4)), Quaternion(*rng.standard_normal(4))
        d = (p * q).to_multivector() - p.to_multivector() * q.to_multivector()
        hom = max(hom, float(np.max(np.abs(d.coeffs))))
    report(1, exact and worst <= 1e-12 and hom <= 1e-12,
           f"generators exact={exact}, associativity {worst:.2e}, quaternion homomorphism {hom:.2e}")


@crit(2, "paravector inverse")
def test_c02_paravector_inverse():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for i in range(200):
        n = 2 + i % 3
        x = Multivector.paravector(rng.standard_normal(), rng.standard_normal(n))
        one = Multivector.scalar(n, 1.0)
        worst = max(worst, (x * paravector_inverse(x) - one).norm(), (paravector_inverse(x) * x - one).norm())
    report(2, worst <= 1e-12, f"max |x x^-1 - 1| = {worst:.2e}")


@crit(3, "harmonic decomposition sweep")
def test_c03_harmonic_decomposition():
    start = time.perf_counter()
    count, ok = 0, True
    for n in (2, 3):
        for d in range(9):
            for a in polyharmonic.monomials(n, d):
                p = polyharmonic.Polynomial.monomial(a)
                terms = polyharmonic.harmonic_decomposition(p)
                ok &= polyharmonic.recombine(n, terms) == p
                ok &= all(polyharmonic.laplacian(h).is_zero() for _, h in terms)
                count += 1
    elapsed = time.perf_counter() - start
    report(3, ok and elapsed <= 120, f"{count} monomials exact={ok} in {elapsed:.1f}s")


@crit(4, "moment identity")
def test_c04_moment_identity():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for n in (2, 3):
        for r in (0.25, 1.0, 3.0):
            p = rng.uniform(-1, 1, n)
            m = ball_average(lambda x: np.sum((x - p) ** 2, axis=1), p, r)
            worst = max(worst, abs(m - n / (n + 2) * r * r))
    report(4, worst <= 1e-8, f"max error {worst:.2e}")


@crit(5, "mean value property")
def test_c05_mean_value():
    rng = np.random.default_rng(SEED)
    worst, control = 0.0, True
    for n in (2, 3):
        basis = [h for d in range(5) for h in polyharmonic.harmonic_basis(n, d)]
        for h in basis:
            f = ScalarField.from_polynomial(h)
            for _ in range(5):
                p, r = rng.uniform(-1, 1, n), rng.uniform(0.1, 1.0)
                worst = max(worst, mean_value_check(f, p, r).deviation)
        sq = ScalarField(lambda x: np.sum(x**2, axis=1), n)
        for _ in range(5):
            p, r = rng.uniform(-1, 1, n), rng.uniform(0.1, 1.0)
            rep = mean_value_check(sq, p, r)
            # ball average of |x|^2 exceeds |p|^2 by n r^2 / (n + 2)
            control &= rep.record()["verdict"] == "fail"
            control &= abs(rep.ball_deviation - n / (n + 2) * r * r) <= 1e-8 and rep.ball_deviation > 0
    report(5, worst <= 1e-8 and control, f"harmonic max deviation {worst:.2e}, |x|^2 control fails as predicted={control}")


@crit(6, "bump factory")
def test_c06_bump_factory():
    rng = np.random.default_rng(SEED)
    ode, lap, pair = 0.0, 0.0, 0.0
    h = 1e-3
    for kind in SIGMA_FAMILIES:
        for n in (2, 3):
            b = standard_bump(n, kind)
            u = np.linspace(0, 1.2, 1024)
            ode = max(ode, float(np.max(np.abs(4 * u * b.theta_prime(u) + 2 * n * b.theta(u) - b.sigma(u)))))
            f = ScalarField(b.phi, n, h=h)
            for _ in range(50):
                x = unit(rng, n) * rng.uniform(0.1, 1.1)
                err = abs(fd_laplacian(f, x) - b.sigma(np.array([x @ x]))[0])
                lap = max(lap, err / h**2)
            hs = [ScalarField.from_polynomial(q) for q in polyharmonic.harmonic_basis(n, 3)[:5]]
            for g in hs:
                pair = max(pair, weak_harmonic_test(g, [b], [rng.uniform(-1, 1, n)]).max_abs)
    # C h^2 with C = 100 covers the fourth derivatives of the bumps
    report(6, ode <= 1e-6 and lap <= 100 and pair <= 1e-6,
           f"ODE residual {ode:.2e}, Laplacian error / h^2 {lap:.2f}, max pairing {pair:.2e}")


@crit(7, "Poisson ball kernel")
def test_c07_poisson_ball():
    rng = np.random.default_rng(SEED)
    norm, centre = 0.0, 0.0
    for n in (2, 3):
        for _ in range(10):
            x = unit(rng, n) * rng.uniform(0, 0.95)
            norm = max(norm, abs(kernels.ball_kernel_mass(x) - 1))
        for _ in range(10):
            centre = max(centre, abs(kernels.poisson_ball(np.zeros(n), unit(rng, n)) - 1 / sphere_area(n)))
    one, x1 = BoundaryFunction.constant(2), BoundaryFunction.from_expression("x1", 2)
    ext = 0.0
    for _ in range(10):
        x = unit(rng, 2) * rng.uniform(0, 0.99)
        ext = max(ext, abs(kernels.harmonic_extension_ball(one, x) - 1), abs(kernels.harmonic_extension_ball(x1, x) - x[0]))
    f = BoundaryFunction.from_expression("abs(x1) + max(x2, 0) - x1*x2", 2)
    bmax = float(np.max(f(sphere_rule(2, 4096)[0])))
    imax = max(kernels.harmonic_extension_ball(f, unit(rng, 2) * rng.uniform(0, 0.99)) for _ in range(50))
    ok = norm <= 1e-8 and centre <= 1e-12 and ext <= 1e-6 and imax <= bmax + 1e-8
    report(7, ok, f"normalization {norm:.2e}, P(0,.) {centre:.2e}, extensions {ext:.2e}, interior max {imax:.6f} <= {bmax:.6f}")


@crit(8, "half-space kernel")
def test_c08_halfspace():
    mass = max(abs(kernels.halfspace_kernel_mass(n, t) - 1) for n in (1, 2) for t in (0.5, 1.0, 2.0))
    ones = 0.0
    for n in (1, 2):
        one = BoundaryFunction.constant(n, domain="plane")
        for t in (0.5, 1.0, 2.0):
            ones = max(ones, abs(kernels.harmonic_extension_halfspace(one, np.full(n, 0.3), t) - 1))
    rng = np.random.default_rng(SEED)
    ht = ScalarField(lambda p: p[:, -1], 2, Box((-2.0, 0.0), (2.0, 2.0)))
    ext = schwarz_reflect(ht)
    refl = 0.0
    for _ in range(10):
        p = np.array([rng.uniform(-1, 1), rng.uniform(-0.3, 0.3)])
        refl = max(refl, mean_value_check(ext, p, 0.5).deviation)
    report(8, mass <= 1e-6 and ones <= 1e-6 and refl <= 1e-8,
           f"kernel mass {mass:.2e}, f=1 extension {ones:.2e}, reflected mean value {refl:.2e}")


@crit(9, "fundamental solutions")
def test_c09_fundamental():
    weak, halving = 0.0, True
    for n in (1, 2, 3):
        for data in (polynomial_bump(n), factory_bump_data(standard_bump(n, "poly4"))):
            h = DEFAULT_WEAK_H[n]
            e1 = abs(newtonian_weak_residual(*data, n, h=h))
            e2 = abs(newtonian_weak_residual(*data, n, h=h / 2))
            weak = max(weak, e1)
            halving &= e2 <= e1 / 2 or e2 <= 1e-9
    rng = np.random.default_rng(SEED)
    hol, prop = 0.0, 0.0
    for n in (2, 3):
        E = CliffordField.from_vector(kernels.clifford_fundamental_array, n, h=1e-3)
        N = ScalarField(lambda p, n=n: kernels.newtonian(p, n), n, h=1e-4)
        nu = kernels.kernel_constants(n).nu
        for _ in range(50):
            x = unit(rng, n) * (0.5 + rng.random())
            scale = np.linalg.norm(x) ** (-n - 2) * 1e-6
            hol = max(hol, dirac_left(E, x).norm() / scale, dirac_right(E, x).norm() / scale)
            Ex = Multivector.vector(kernels.clifford_fundamental_array(x)[0])
            prop = max(prop, float(np.max(np.abs((nu * dirac_left(N, x) - Ex).coeffs))))
    # C h^2 with h = 1e-3 and C = 50 |x|^{-n-2}
    report(9, weak <= 5e-3 and halving and hol <= 50 and prop <= 1e-6,
           f"weak residual {weak:.2e} (halving={halving}), D E_n / (h^2 |x|^-n-2) {hol:.2f}, E_n - nu D_L N_n {prop:.2e}")


@crit(10, "subharmonicity")
def test_c10_subharmonic():
    rng = np.random.default_rng(SEED)
    sq = ScalarField(lambda p: np.sum(p**2, axis=1), 2)
    relu = ScalarField(lambda p: np.maximum(p[:, 0], 0.0), 2)
    absz = ScalarField(lambda p: np.abs((p[:, 0] + 1j * p[:, 1]) ** 2) ** 0.5, 2)
    harm = [ScalarField(lambda p: p[:, 0] ** 2 - p[:, 1] ** 2, 2), ScalarField(lambda p: p[:, 0] * p[:, 1] + p[:, 0], 2)]
    low, control = math.inf, 0.0
    for _ in range(20):
        p, r = rng.uniform(-1, 1, 2), rng.uniform(0.05, 1.0)
        for f in (sq, relu, absz):
            low = min(low, sub_mean_value_check(f, p, r).deviation)
        for g in harm:
            control = max(control, abs(sub_mean_value_check(g, p, r).deviation))
    balls = [(rng.uniform(-1, 1, 2), rng.uniform(0.05, 1.0)) for _ in range(20)]
    z2 = ScalarField(lambda p: (p[:, 0] + 1j * p[:, 1]) ** 2, 2)
    power = calculus.holomorphic_power_check(z2, 0.5, balls).passed()
    report(10, low >= -1e-8 and control <= 1e-8 and power,
           f"min sub-mean deviation {low:.2e}, harmonic controls {control:.2e}, |z^2|^(1/2) check={power}")


@crit(11, "series")
def test_c11_series():
    kinds = (
        series.radius_of_convergence(series.geometric()).kind,
        series.radius_of_convergence(series.exp_series()).kind,
        series.radius_of_convergence(series.factorial_series()).kind,
    )
    geo_r = series.radius_of_convergence(series.geometric()).value
    e2 = series.cauchy_product(series.exp_series(), series.exp_series())
    from fractions import Fraction

    cauchy = all(e2.coefficient(k) == Fraction(2**k, math.factorial(k)) for k in range(40))
    abel = series.abel_sum(series.geometric(), -1)
    exp_err = abs(series.exp_complex(2j * math.pi) - 1)
    z = 0.3 - 1.7j
    d = series.log_branch(z, 1) - series.log_branch(z, 0)
    # the branch offset is the float 2*pi added once; the difference rounds to it
    logs = d.real == 0 and abs(d.imag - 2 * math.pi) <= 2 * np.spacing(2 * math.pi)
    ok = kinds == ("finite", "infinite", "zero") and abs(geo_r - 1) <= 1e-9 and cauchy
    ok &= abel.summable and abs(abel.value - 0.5) <= 1e-6 and exp_err <= 1e-12 and logs
    report(11, ok, f"radii {kinds}, exp*exp exact={cauchy}, Abel {abel.value.real:.9f}, |exp(2 pi i) - 1| {exp_err:.1e}, log branches={logs}")


@crit(12, "linear algebra")
def test_c12_linear_algebra():
    rng = np.random.default_rng(SEED)
    polar, cstar = 0.0, 0.0
    for k in range(200):
        n = 1 + k % 6
        T = rng.standard_normal((n, n))
        A, S = linalg.polar_decomposition(T)
        polar = max(polar, float(np.max(np.abs(A @ S - T))))
        nt = linalg.operator_norm(T)
        cstar = max(cstar, abs(linalg.operator_norm(T.T @ T) - nt**2) / max(1.0, nt**2))
    lift = 0.0
    for k in range(100):
        n = 2 + k % 2
        Q, R = np.linalg.qr(rng.standard_normal((n, n)))
        L = linalg.lift_orthogonal_to_clifford(Q * np.sign(np.diag(R)))
        x, y = random_mv(rng, n), random_mv(rng, n)
        lift = max(lift, float(np.max(np.abs((L(x * y) - L(x) * L(y)).coeffs))))
    report(12, polar <= 1e-9 and cstar <= 1e-9 and lift <= 1e-10,
           f"polar {polar:.2e}, C* identity {cstar:.2e}, lift homomorphism {lift:.2e}")


@crit(13, "Dirichlet energy")
def test_c13_dirichlet():
    rng = np.random.default_rng(SEED)

    def grid(f):
        return GridField.sample(f, (-1.0, -1.0), 0.02, (101, 101))

    h = grid(lambda x: x[:, 0] ** 2 - x[:, 1] ** 2 + x[:, 0] * x[:, 1] + x[:, 1])
    Eh = dirichlet_energy(h)
    pair, cross = 0.0, 0.0
    for _ in range(10):
        p, rad = rng.uniform(-0.4, 0.4, 2), rng.uniform(0.2, 0.5)
        # restricted support: the disc of radius rad around p stays inside the open square

        def bump(x, p=p, rad=rad):
            u = np.sum((x - p) ** 2, axis=1) / rad**2
            return np.where(u < 1, (1 - u) ** 4, 0.0)

        phi = grid(bump)
        Ep = dirichlet_energy(phi)
        pair = max(pair, abs(dirichlet_pairing(h, phi)))
        total = dirichlet_energy(grid_add(h, phi))
        cross = max(cross, abs(total - Eh - Ep) / total)
    report(13, pair <= 1e-6 and cross <= 1e-6, f"max |B(h, phi)| {pair:.2e}, relative energy defect {cross:.2e}")


def _run(argv):
    import contextlib
    import io

    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue()


@crit(14, "CLI determinism and exit codes")
def test_c14_cli(tmp_path):
    g = GridField.sample(lambda x: x[:, 0] ** 2 - x[:, 1] ** 2, (-0.5, -0.5), 0.05, (21, 21))
    (tmp_path / "h.csv").write_text(g.to_csv())
    (tmp_path / "h.json").write_text(g.sidecar())
    golden = [
        ["solve-ball", "--boundary", "x1^2 - x2", "--grid-h", "0.5"],
        ["solve-halfspace", "--n", "1", "--boundary", "sign(x)", "--points", "0.5,1;-1,2"],
        ["verify", "--field", str(tmp_path / "h.csv"), "--checks", "harmonic,subharmonic", "--samples", "3"],
        ["decompose", "--n", "3", "x1^2*x2 + x3^4"],
        ["eval", "clifford: (1 + e1) * (1 - e1)"],
        ["constants", "--all"],
    ]
    same = True
    for argv in golden:
        a, b = _run(argv), _run(argv)
        same &= a == b and a[0] == 0 and a[1] != ""
    probes = {
        ("decompose", "x1^^2"): 1,
        ("solve-halfspace", "--n", "1", "--boundary", "1", "--points", "0,-1"): 2,
        ("eval", "moebius: {1,2,2,4} @ 0"): 2,
    }
    codes = {p: _run(list(p))[0] for p in probes}
    contract = all(codes[p] == c for p, c in probes.items())
    report(14, same and contract, f"byte-identical reruns={same}, exit codes {list(codes.values())} expected {list(probes.values())}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
