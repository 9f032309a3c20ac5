"""Sweep settings for the standard bifurcation pictures.

Each entry fixes the regularizer, ``b``, the ``a`` range, the grid
resolution used here and the vertical window that the picture displays.
The resolutions are chosen so that one grid column is no wider than a
printed pixel at the usual figure width.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .bifurcation import BifurcationDataset, SweepConfig, sweep
from .regularizers import hct, logbarrier, parse_regularizer, perturbed


@dataclass(frozen=True)
class FigureSweep:
    name: str
    regularizer: str
    b: float
    a_min: float
    a_max: float
    steps: int
    x_window: tuple[float, float] = (0.0, 1.0)

    def config(self, workers: int = 1) -> SweepConfig:
        return SweepConfig(
            self.a_min, self.a_max, self.steps, self.b, parse_regularizer(self.regularizer),
            workers=workers,
        )


FIGURES = {
    f.name: f
    for f in (
        FigureSweep("perturbed_coexistence", perturbed().spec, 0.61, 2.6, 3.4, 800),
        FigureSweep("logbarrier_exchange", logbarrier().spec, 0.61, 146.97, 147.0, 300, (0.27, 0.34)),
        FigureSweep("logbarrier_local", logbarrier().spec, 0.61, 153.0, 156.5, 1750, (0.03, 0.13)),
        FigureSweep("logbarrier_cascade", logbarrier().spec, 0.61, 10.0, 190.0, 1800),
        FigureSweep("hct_cascade", hct(0.5).spec, 0.61, 4.0, 46.0, 1680),
        FigureSweep("hct_escape", hct(0.5).spec, 0.61, 39.75, 40.0, 250, (0.65, 0.8)),
    )
}


def generate(names=None, workers: int = 1) -> tuple[dict[str, BifurcationDataset], dict[str, float]]:
    """Run the named figure sweeps (all by default); return datasets and wall times."""
    names = list(FIGURES) if names is None else list(names)
    data, timing = {}, {}
    for name in names:
        t0 = time.perf_counter()
        data[name] = sweep(FIGURES[name].config(workers))
        timing[name] = time.perf_counter() - t0
    return data, timing
