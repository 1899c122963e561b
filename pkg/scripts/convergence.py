"""Determinant zero vs dense extreme eigenvalue as the grid is refined (d=1, K=0).

Usage: python scripts/convergence.py [--gamma 4] [--mu 4] [--ns 16,32,64]
"""

import argparse
import time

from latbound import Coupling, QuadGrid, essential_spectrum, solve_three_body
from latbound.oracle import H_matrix


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma", type=float, default=4.0)
    ap.add_argument("--mu", type=float, default=4.0)
    ap.add_argument("--ns", default="16,32,64")
    args = ap.parse_args()
    cpl = Coupling(args.mu, args.gamma)
    print(f"{'n':>5} {'det zero':>18} {'dense':>18} {'|diff|':>10} {'dense s':>8}")
    for n in (int(s) for s in args.ns.split(",")):
        grid = QuadGrid(1, n)
        E = solve_three_body(0.0, cpl, grid, ess=essential_spectrum(0.0, cpl, grid)).energy
        t0 = time.perf_counter()
        dense = H_matrix(0.0, cpl, grid).extremal("max" if args.mu > 0 else "min")
        dt = time.perf_counter() - t0
        print(f"{n:5d} {E:18.12f} {dense:18.12f} {abs(E - dense):10.2e} {dt:8.2f}")


if __name__ == "__main__":
    main()
