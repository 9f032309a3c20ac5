"""Scan a upward and report the first grid value with a period-3 certificate.

The reported value is an upper bound for the onset of Li-Yorke chaos at the
given b, since a finer grid or a finer witness search can only move it down.
"""

import argparse

import numpy as np

from forel_dynamics import MapParams, parse_regularizer
from forel_dynamics.analysis import lmpy_certificate, verify_certificate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("regularizer", nargs="?", default="logbarrier")
    ap.add_argument("--b", type=float, default=0.61)
    ap.add_argument("--a-min", type=float, default=20.0)
    ap.add_argument("--a-max", type=float, default=200.0)
    ap.add_argument("--steps", type=int, default=180)
    ap.add_argument("--power", type=int, default=1)
    args = ap.parse_args()

    reg = parse_regularizer(args.regularizer)
    for a in np.linspace(args.a_min, args.a_max, args.steps + 1):
        p = MapParams(float(a), args.b)
        cert = lmpy_certificate(reg, p, args.power, 3)
        if cert is not None and verify_certificate(reg, p, cert):
            u, v = cert.witness_interval
            print(f"{reg.spec} b={args.b}: period {cert.implied_period} certified at a={a:.6g} "
                  f"on [{u:.10f}, {v:.10f}]")
            return
    print(f"{reg.spec} b={args.b}: no certificate for a in [{args.a_min}, {args.a_max}]")


if __name__ == "__main__":
    main()
