"""Smallest corner exponent for two-material corners over angle and contrast.

    python3 scripts/exponent_table.py
"""

import argparse
import math

from pcfband.corners import find_exponents, solve_lamc
from pcfband.geometry import CornerSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ratios", type=float, nargs="+", default=[1.5, 3, 10, 30, 100, 300, 1000])
    args = ap.parse_args()

    angles = [k for k in range(1, 12) if k != 6]
    print("omega    " + " ".join(f"{r:>9g}" for r in args.ratios))
    worst = 0.0
    for k in angles:
        w = k * math.pi / 6
        row = []
        for r in args.ratios:
            a = solve_lamc(w, r, 1.0)[0].lam
            b = find_exponents(CornerSpec.two_material(w, r, 1.0))[0].lam
            worst = max(worst, abs(a - b))
            row.append(a)
        print(f"{k:2d}pi/6   " + " ".join(f"{x:9.6f}" for x in row))
    cross = CornerSpec((0, 0), tuple((math.pi / 2, e) for e in (1.0, 50.0, 1.0, 50.0)))
    print(f"\nmax disagreement between the two routes: {worst:.1e}")
    print(f"checkerboard cross point, contrast 50: lambda = {find_exponents(cross)[0].lam:.6f}")


if __name__ == "__main__":
    main()
