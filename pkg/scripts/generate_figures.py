"""Write the bifurcation datasets behind each standard bifurcation picture as CSV.

    python scripts/generate_figures.py --out figures/ --workers 4
    python scripts/generate_figures.py --only hct_escape logbarrier_exchange
"""

import argparse
from pathlib import Path

from forel_dynamics.figures import FIGURES, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("figures"))
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--only", nargs="+", choices=sorted(FIGURES), default=None)
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    data, timing = generate(args.only, workers=args.workers)
    for name, ds in data.items():
        fig = FIGURES[name]
        path = args.out / f"{name}.csv"
        path.write_text(ds.to_csv())
        print(f"{name:24s} {fig.regularizer:28s} a in [{fig.a_min}, {fig.a_max}] "
              f"x window {fig.x_window}  {timing[name]:6.2f} s -> {path}")
    print(f"total {sum(timing.values()):.1f} s")


if __name__ == "__main__":
    main()
