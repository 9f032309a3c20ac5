"""Lap-number entropy and Lyapunov exponent along a grid of a, printed as CSV."""

import argparse
import sys

import numpy as np

from forel_dynamics import MapParams, parse_regularizer
from forel_dynamics.analysis import lyapunov_exponent, topological_entropy_lap
from forel_dynamics.errors import ForelError


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("regularizer", nargs="?", default="logbarrier")
    ap.add_argument("--b", type=float, default=0.61)
    ap.add_argument("--a-min", type=float, default=10.0)
    ap.add_argument("--a-max", type=float, default=190.0)
    ap.add_argument("--steps", type=int, default=90)
    ap.add_argument("--n-max", type=int, default=16)
    ap.add_argument("--x0", type=float, default=0.3)
    args = ap.parse_args()

    reg = parse_regularizer(args.regularizer)
    print("a,entropy,laps,lyapunov")
    for a in np.linspace(args.a_min, args.a_max, args.steps + 1):
        p = MapParams(float(a), args.b)
        try:
            est = topological_entropy_lap(reg, p, args.n_max)
            lam = lyapunov_exponent(reg, p, args.x0, n=20_000)
        except ForelError as exc:
            print(f"# a={a:.6g}: {exc}", file=sys.stderr)
            continue
        print(f"{a:.6g},{est.final:.6g},{est.lap_counts[-1]},{lam:.6g}")


if __name__ == "__main__":
    main()
