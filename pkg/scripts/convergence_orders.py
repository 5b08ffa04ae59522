"""Observed orders of the finite-difference and weak-identity discretisations.

Prints CSV: quantity, n, h, error, observed order (log2 of successive ratios).
"""

import math

import numpy as np

from cliffharm.calculus import (
    DEFAULT_WEAK_H,
    ScalarField,
    fd_laplacian,
    newtonian_weak_residual,
    polynomial_bump,
    wirtinger,
)


def rows():
    x = np.array([0.3, -0.4, 0.2])
    for n in (2, 3):
        f = ScalarField(lambda p: np.exp(p[:, 0]) * np.cos(p[:, 1]) + p[:, 0] ** 4, n)
        exact = 12 * x[0] ** 2
        prev = None
        for h in (1e-1, 5e-2, 2.5e-2, 1.25e-2):
            err = abs(fd_laplacian(ScalarField(f.func, n, h=h), x[:n]) - exact)
            yield "laplacian", n, h, err, prev
            prev = err
    g = ScalarField(lambda p: p[:, 0] ** 4 + 1j * p[:, 1] ** 4, 2)
    z = np.array([0.7, -0.5])
    exact = 0.5 * (4 * z[0] ** 3 - 4 * z[1] ** 3)
    prev = None
    for h in (1e-1, 5e-2, 2.5e-2, 1.25e-2):
        err = abs(wirtinger(ScalarField(g.func, 2, h=h), z, "dzbar") - exact)
        yield "dzbar", 2, h, err, prev
        prev = err
    for n in (1, 2, 3):
        prev = None
        h0 = DEFAULT_WEAK_H[n]
        for h in (h0, h0 / 2, h0 / 4):
            err = abs(newtonian_weak_residual(*polynomial_bump(n), n, h=h))
            yield "newtonian_weak", n, h, err, prev
            prev = err


def main():
    print("quantity,n,h,error,order")
    for name, n, h, err, prev in rows():
        order = math.log2(prev / err) if prev and err > 0 else float("nan")
        print(f"{name},{n},{h:.6g},{err:.6e},{order:.3f}")


if __name__ == "__main__":
    main()
