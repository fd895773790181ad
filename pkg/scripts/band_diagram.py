"""Band diagram of the square-rod fibre along G-X-M-G, printed as a table.

    python3 scripts/band_diagram.py --cutoff 8 --beta 1.0 --bands 6
"""

import argparse

import numpy as np

from pcfband.convergence import band_sweep, detect_gaps
from pcfband.lattice import KPath, Lattice2D
from pcfband.medium import eta_fourier_polygon, square_rod


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cutoff", type=int, default=8)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--bands", type=int, default=6)
    ap.add_argument("--samples", type=int, default=6)
    ap.add_argument("--n2-rod", type=float, default=13.0)
    args = ap.parse_args()

    lat = Lattice2D.square()
    table = eta_fourier_polygon(square_rod(lat, n2_rod=args.n2_rod), args.cutoff)
    path = KPath(((0, 0), (np.pi, 0), (np.pi, np.pi), (0, 0)), ("G", "X", "M", "G"), args.samples)
    bt = band_sweep(table, lat, path, args.beta, args.cutoff, args.bands)

    print(f"{'label':>5} {'s':>8}  " + " ".join(f"{'band ' + str(b):>10}" for b in range(args.bands)))
    for lab, s, row in zip(bt.labels, bt.arclength, bt.kappa2):
        print(f"{lab:>5} {s:8.4f}  " + " ".join(f"{v:10.5f}" for v in row))
    gaps = detect_gaps(bt.kappa2)
    print("gaps:", ", ".join(f"({lo:.4f}, {hi:.4f})" for lo, hi in gaps) if gaps else "none")


if __name__ == "__main__":
    main()
