"""Parameter sweeps over the demand ``a`` seeded at critical points."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import _kernels as K
from .analysis import CRITICAL_GRID
from .dynamics import DEFAULT_KEEP, DEFAULT_TRANSIENT
from .errors import ConfigError, ConvergenceError, NotFoundError, SeedCountError
from .regularizers import Regularizer, _require_admissible, parse_regularizer

MAX_SEEDS = 8


@dataclass
class SweepConfig:
    a_min: float
    a_max: float
    steps: int
    b: float
    regularizer: Regularizer
    transient: int = DEFAULT_TRANSIENT
    keep: int = DEFAULT_KEEP
    seed_mode: str | list[float] = "critical_points"
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.regularizer, str):
            self.regularizer = parse_regularizer(self.regularizer)
        if not (0.0 < self.a_min < self.a_max):
            raise ConfigError("need 0 < a_min < a_max", parameter="a_min")
        if self.steps < 1:
            raise ConfigError("steps must be positive", parameter="steps")
        if not 0.0 < self.b < 1.0:
            raise ConfigError("b must lie in (0, 1)", parameter="b")
        if self.keep < 1 or self.transient < 0:
            raise ConfigError("need keep >= 1 and transient >= 0", parameter="keep")
        if isinstance(self.seed_mode, str):
            if self.seed_mode != "critical_points":
                raise ConfigError(f"unknown seed_mode {self.seed_mode!r}", parameter="seed_mode")
        else:
            self.seed_mode = [float(s) for s in self.seed_mode]
            if not self.seed_mode or not all(0.0 < s < 1.0 for s in self.seed_mode):
                raise ConfigError("explicit seeds must lie in (0, 1)", parameter="seed_mode")

    @property
    def a_grid(self) -> np.ndarray:
        return np.linspace(self.a_min, self.a_max, self.steps + 1)

    def to_dict(self) -> dict:
        return {
            "a_min": self.a_min,
            "a_max": self.a_max,
            "steps": self.steps,
            "b": self.b,
            "regularizer": self.regularizer.spec,
            "transient": self.transient,
            "keep": self.keep,
            "seed_mode": self.seed_mode,
        }


@dataclass
class BifurcationDataset:
    """Retained orbit points per (a, seed).

    ``points[i, j]`` holds the ``keep`` retained iterates for ``a_values[i]``
    and seed ``seed_labels[j]``; ``seeds[i, j]`` is the starting point.
    """

    config: SweepConfig
    a_values: np.ndarray
    seed_labels: list[str]
    seeds: np.ndarray
    points: np.ndarray

    def cloud(self, i: int, label: str) -> np.ndarray:
        return self.points[i, self.seed_labels.index(label)]

    def diameters(self) -> np.ndarray:
        return self.points.max(axis=2) - self.points.min(axis=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, val in self.config.to_dict().items():
            buf.write(f"# {key} = {val}\n")
        buf.write(f"# version = {__version__}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a", "seed", "k", "x"])
        start = self.config.transient + 1
        for i, a in enumerate(self.a_values):
            a_txt = format(a, ".17g")
            for j, label in enumerate(self.seed_labels):
                for k, x in enumerate(self.points[i, j]):
                    w.writerow([a_txt, label, start + k, format(x, ".17g")])
        return buf.getvalue()


def _seed_labels(count: int) -> list[str]:
    if count == 2:
        return ["left", "right"]
    if count == 1:
        return ["center"]
    return [f"c{i}" for i in range(count)]


def _sweep_chunk(args):
    kind, p0, p1, avals, b, seed_mode, transient, keep = args
    n = avals.size
    if seed_mode == "critical_points":
        crit = np.full((n, MAX_SEEDS), np.nan)
        counts = np.zeros(n, dtype=np.int64)
        K.critical_points_batch(kind, p0, p1, avals, CRITICAL_GRID, MAX_SEEDS, crit, counts)
        seeds = crit
    else:
        counts = np.full(n, len(seed_mode), dtype=np.int64)
        seeds = np.tile(np.asarray(seed_mode, dtype=float), (n, 1))
    width = int(counts.max()) if n else 0
    if width == 0 or counts.min() != width:
        return counts, None, None, None
    seeds = np.ascontiguousarray(seeds[:, :width])
    flat_a = np.repeat(avals, width)
    flat_seed = seeds.ravel()
    y0 = K.psi_array(kind, p0, p1, flat_seed)
    xs = np.empty((flat_a.size, keep))
    ys = np.empty((flat_a.size, keep))
    status = np.zeros(flat_a.size, dtype=np.int64)
    K.iterate_batch(kind, p0, p1, flat_a, b, np.ascontiguousarray(flat_seed), y0, transient, keep, xs, ys, status)
    return counts, seeds, xs.reshape(n, width, keep), status.reshape(n, width)


def sweep(config: SweepConfig) -> BifurcationDataset:
    """Iterate every seed at every grid value of ``a`` and keep the tails.

    Chunks of the grid may run in worker processes; each (a, seed) task is
    computed independently, so the output does not depend on ``workers``.
    """
    reg = config.regularizer
    _require_admissible(reg)
    grid = config.a_grid
    workers = max(1, int(config.workers))
    chunks = np.array_split(grid, min(workers * 4, grid.size)) if workers > 1 else [grid]
    tasks = [(*reg.kernel_args, np.ascontiguousarray(c), config.b, config.seed_mode,
              config.transient, config.keep) for c in chunks]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_chunk, tasks))
    else:
        results = [_sweep_chunk(t) for t in tasks]

    counts = np.concatenate([r[0] for r in results])
    if counts.min() == 0:
        bad = grid[np.argmax(counts == 0)]
        raise ConfigError(
            f"{reg.spec} has no critical point at a={bad!r}; raise a_min or pass explicit seeds",
            parameter="a_min", a=float(bad),
        )
    if counts.min() != counts.max():
        bad = grid[np.argmax(counts != counts[0])]
        raise ConfigError(
            f"number of critical points changes at a={bad!r}", parameter="a_min", a=float(bad)
        )
    seeds = np.concatenate([r[1] for r in results])
    points = np.concatenate([r[2] for r in results])
    status = np.concatenate([r[3] for r in results])
    if status.any():
        i, j = map(int, np.argwhere(status)[0])
        raise ConvergenceError(
            "inversion failed during sweep", parameter="a", a=float(grid[i]), seed=float(seeds[i, j])
        )
    if isinstance(config.seed_mode, str):
        labels = _seed_labels(int(counts[0]))
    else:
        labels = [f"s{j}" for j in range(int(counts[0]))]
    return BifurcationDataset(config, grid, labels, seeds, points)


# ---------------------------------------------------------------------------

@dataclass
class AttractorComparison:
    a_grid: np.ndarray
    separation: np.ndarray
    windows: list[tuple[float, float]] = field(default_factory=list)
    threshold: float = 1e-3
    noise_floor: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "a_grid": [float(a) for a in self.a_grid],
            "separation": [float(s) for s in self.separation],
            "windows": [{"a_lo": lo, "a_hi": hi} for lo, hi in self.windows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def cloud_separation(u: np.ndarray, v: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two finite point sets on a line."""
    su, sv = np.sort(u), np.sort(v)

    def one_way(p, q):
        idx = np.clip(np.searchsorted(q, p), 1, q.size - 1) if q.size > 1 else np.zeros(p.size, int)
        d = np.abs(p - q[idx])
        if q.size > 1:
            d = np.minimum(d, np.abs(p - q[idx - 1]))
        return float(d.max())

    return max(one_way(su, sv), one_way(sv, su))


def coexistence_windows(a_grid, separation, threshold) -> list[tuple[float, float]]:
    above = np.asarray(separation) > threshold
    windows = []
    i = 0
    while i < above.size:
        if above[i]:
            j = i
            while j + 1 < above.size and above[j + 1]:
                j += 1
            windows.append((float(a_grid[i]), float(a_grid[j])))
            i = j + 1
        else:
            i += 1
    return windows


def sampling_noise(cloud: np.ndarray) -> float:
    """Hausdorff distance between the two halves of one retained cloud.

    For a finite sample of a chaotic attractor this measures how far apart
    two samples of the *same* attractor can look, which sets a floor below
    which a separation between two clouds is not evidence of two attractors.
    """
    half = cloud.size // 2
    if half == 0:
        return 0.0
    return cloud_separation(cloud[:half], cloud[half:])


def compare_attractors(
    ds: BifurcationDataset,
    separation_threshold: float = 1e-3,
    noise_factor: float = 2.0,
) -> AttractorComparison:
    """Separation of the two seed clouds per ``a`` and the runs where it is large.

    A grid point counts toward a window when the separation exceeds both
    ``separation_threshold`` and ``noise_factor`` times the larger sampling
    noise of the two clouds; ``noise_factor=0`` applies the bare threshold.
    """
    if len(ds.seed_labels) != 2:
        raise SeedCountError(
            f"need exactly two seeds, dataset has {len(ds.seed_labels)}", parameter="seed_mode"
        )
    if not separation_threshold > 0.0:
        raise ConfigError("separation_threshold must be positive", parameter="separation_threshold")
    if noise_factor < 0.0:
        raise ConfigError("noise_factor must be nonnegative", parameter="noise_factor")
    n = ds.a_values.size
    sep = np.array([cloud_separation(ds.points[i, 0], ds.points[i, 1]) for i in range(n)])
    noise = np.array([
        max(sampling_noise(ds.points[i, 0]), sampling_noise(ds.points[i, 1])) for i in range(n)
    ])
    effective = np.maximum(separation_threshold, noise_factor * noise)
    windows = coexistence_windows(ds.a_values, sep - effective, 0.0)
    return AttractorComparison(ds.a_values, sep, windows, separation_threshold, noise)


def band_diameters(ds: BifurcationDataset, lo: float, hi: float) -> np.ndarray:
    """Diameter of each cloud restricted to the band ``lo < x < hi`` (0 if empty)."""
    inside = (ds.points > lo) & (ds.points < hi)
    top = np.where(inside, ds.points, -np.inf).max(axis=2)
    bottom = np.where(inside, ds.points, np.inf).min(axis=2)
    return np.where(inside.any(axis=2), top - bottom, 0.0)


def first_bifurcation(ds: BifurcationDataset, tol: float = 1e-6) -> float:
    """Smallest grid ``a`` where some retained cloud has diameter above ``tol``."""
    wide = (ds.diameters() > tol).any(axis=1)
    if not wide.any():
        raise NotFoundError("no bifurcation inside the swept range", parameter="a_max")
    return float(ds.a_values[int(np.argmax(wide))])
