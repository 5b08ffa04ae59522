"""Dirichlet problems on the unit disc and the upper half-plane.

Solves the disc problem for boundary data |x1| and the half-plane problem
for sign(x), checks the half-plane answer against (2/pi) atan(x/t), and
prints plot-ready CSV. The disc value at the centre is 2/pi.
"""

import math

import numpy as np

from cliffharm.kernels import BoundaryFunction, harmonic_extension_ball, harmonic_extension_halfspace


def main():
    f = BoundaryFunction.from_expression("abs(x1)", 2)
    print("# disc, boundary |x1|")
    print("x1,x2,value")
    print(f"0.000000,0.000000,{harmonic_extension_ball(f, np.zeros(2)):.12f}")
    for r in (0.25, 0.5, 0.75, 0.95):
        for a in np.linspace(0, math.pi / 2, 4):
            x = r * np.array([math.cos(a), math.sin(a)])
            print(f"{x[0]:.6f},{x[1]:.6f},{harmonic_extension_ball(f, x):.12f}")
    g = BoundaryFunction.from_expression("sign(x)", 1, "plane", bound=1)
    print("# half-plane, boundary sign(x)")
    print("x,t,value,exact,error")
    for t in (0.1, 0.5, 1.0, 2.0):
        for x in (-1.0, -0.2, 0.0, 0.3, 1.5):
            v = harmonic_extension_halfspace(g, np.array([x]), t)
            e = 2 / math.pi * math.atan(x / t)
            print(f"{x},{t},{v:.12f},{e:.12f},{abs(v - e):.2e}")


if __name__ == "__main__":
    main()
