"""Scan trimer existence at K=0 over mass ratio and coupling (d=1).

Usage: python scripts/trimer_scan.py [--n 64] [--gammas 1,2,4,8] [--mus=-4,-1,1,4]
"""

import argparse

import numpy as np

from latbound import Coupling, QuadGrid, essential_spectrum, solve_three_body
from latbound.errors import BoundStateNotFound


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--gammas", default="1,2,4,8")
    ap.add_argument("--mus", default="-4,-1,1,4")
    args = ap.parse_args()
    grid = QuadGrid(1, args.n)
    gammas = [float(s) for s in args.gammas.split(",")]
    mus = [float(s) for s in args.mus.split(",")]
    print(f"{'gamma':>6} {'mu':>6} {'tau':>12} {'E(0)':>12} {'distance':>10}")
    for g in gammas:
        for mu in mus:
            cpl = Coupling(mu, g)
            ess = essential_spectrum(0.0, cpl, grid)
            tau = ess.threshold(mu)
            try:
                E = solve_three_body(0.0, cpl, grid, ess=ess).energy
                print(f"{g:6.2f} {mu:6.2f} {tau:12.6f} {E:12.6f} {abs(E - tau):10.2e}")
            except BoundStateNotFound:
                print(f"{g:6.2f} {mu:6.2f} {tau:12.6f} {'none':>12} {np.nan:>10}")


if __name__ == "__main__":
    main()
