"""Calibrated kernel constants against their closed forms, for n = 1..6.

Prints CSV: n, constant, calibrated, closed form, relative difference.
"""

from cliffharm.kernels import (
    calibrate_halfspace_constant,
    calibrate_newtonian_constant,
    halfspace_constant_closed,
    newtonian_constant_closed,
)


def main():
    print("n,constant,calibrated,closed_form,rel_diff")
    for n in range(1, 7):
        for name, cal, closed in (
            ("a_n", calibrate_halfspace_constant, halfspace_constant_closed),
            ("b_n", calibrate_newtonian_constant, newtonian_constant_closed),
        ):
            if name == "b_n" and n < 3:
                # the Newtonian normalisation for n = 1, 2 is fixed by convention
                continue
            c, e = cal(n), closed(n)
            print(f"{n},{name},{c:.17g},{e:.17g},{abs(c - e) / abs(e):.3e}")


if __name__ == "__main__":
    main()
