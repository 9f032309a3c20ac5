"""Locate intervals of a where the two critical-point seeds settle on different attractors.

Runs the log-barrier sweep over [85, 100] and the HCT (q = 1/2) sweep over
[15, 30] at b = 0.61 and prints the windows found with the default noise floor
alongside those from the bare separation threshold.
"""

import argparse

from forel_dynamics import hct, logbarrier
from forel_dynamics.bifurcation import SweepConfig, compare_attractors, sweep

CASES = [
    ("logbarrier", logbarrier(), 85.0, 100.0, 600),
    ("hct q=0.5", hct(0.5), 15.0, 30.0, 600),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--threshold", type=float, default=1e-3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    for label, reg, lo, hi, steps in CASES:
        ds = sweep(SweepConfig(lo, hi, steps, 0.61, reg, workers=args.workers))
        for factor in (2.0, 0.0):
            cmp = compare_attractors(ds, args.threshold, noise_factor=factor)
            spans = ", ".join(f"[{a:.4f}, {b:.4f}]" for a, b in cmp.windows) or "none"
            print(f"{label:12s} noise_factor={factor:g}: {spans}")


if __name__ == "__main__":
    main()
