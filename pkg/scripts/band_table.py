"""Two- and three-body bound-state bands along a momentum sweep (d=1).

Usage: python scripts/band_table.py [--gamma 4] [--mu 4] [--points 16] [--n3 48]
"""

import argparse

import numpy as np

from latbound import Coupling, QuadGrid, essential_spectrum, solve_three_body
from latbound.two_body import solve_energies


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma", type=float, default=4.0)
    ap.add_argument("--mu", type=float, default=4.0)
    ap.add_argument("--points", type=int, default=16)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--n3", type=int, default=48)
    args = ap.parse_args()
    cpl = Coupling(args.mu, args.gamma)
    ks = -np.pi + 2 * np.pi * np.arange(args.points) / args.points
    e = solve_energies(ks, cpl, QuadGrid(1, args.n))
    g3 = QuadGrid(1, args.n3)
    print(f"{'k':>8} {'e(k)':>12} {'tau(k)':>12} {'E(k)':>12}")
    for k, ek in zip(ks, e):
        ess = essential_spectrum(k, cpl, g3)
        E = solve_three_body(k, cpl, g3, ess=ess).energy
        print(f"{k:8.4f} {ek:12.6f} {ess.threshold(args.mu):12.6f} {E:12.6f}")


if __name__ == "__main__":
    main()
