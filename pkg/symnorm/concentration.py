"""Monte-Carlo concentration profiles of symmetric norms.

For each dimension k on a geometric grid the profiler estimates the median
M of l^(k) on the unit sphere, its maximum b, and mc = b / M. The maximum
over the grid, mmc, calibrates sketch sizes in the estimator.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from symnorm.exceptions import ValidationError
from symnorm.hashing import derive_seed
from symnorm.norms import SymmetricNormOracle, norm_from_config, xi
from symnorm.validator import ParameterValidator

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 4000


@dataclass
class ConcentrationProfile:
    """Per-dimension median, max and mc estimates, plus their maximum mmc."""

    norm: Dict[str, Any]
    n: int
    grid: List[int]
    medians: List[float]
    maxima: List[float]
    mc: List[float]
    heuristic: List[bool]
    mmc_estimate: float
    samples_per_k: int
    seed: int

    def mc_at(self, k: int) -> float:
        return self.mc[self.grid.index(k)]

    def peak_dimension(self) -> int:
        """Grid dimension where mc is largest."""
        return self.grid[int(np.argmax(self.mc))]

    def any_heuristic(self) -> bool:
        return any(self.heuristic)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ConcentrationProfile":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__})


def geometric_grid(n: int, grid_size: Optional[int] = None) -> List[int]:
    """
    Dimensions {1, 2, 4, ..., n}, always including 1 and n.

    With ``grid_size`` the grid is thinned to that many log-spaced points.
    """
    ParameterValidator.validate_dimension(n)
    grid = sorted({1 << j for j in range(int(math.log2(n)) + 1) if (1 << j) <= n} | {1, n})
    if grid_size is not None and 2 <= grid_size < len(grid):
        picks = np.unique(np.rint(np.linspace(0, len(grid) - 1, grid_size)).astype(int))
        grid = [grid[i] for i in picks]
    return grid


def sphere_samples(k: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` uniform points on the l_2 unit sphere in R^k."""
    g = rng.standard_normal((count, k))
    lengths = np.linalg.norm(g, axis=1)
    lengths[lengths == 0] = 1.0
    return g / lengths[:, None]


def estimate_median(
    l: SymmetricNormOracle, k: int, samples: int = DEFAULT_SAMPLES, seed: int = 0
) -> float:
    """
    Sample median of l^(k) over uniform points on the unit sphere.

    Raises:
        ValidationError: If k < 1 or samples < 100
    """
    if k < 1:
        raise ValidationError(f"Dimension k must be >= 1, got {k}")
    ParameterValidator.validate_samples(samples)
    rng = np.random.default_rng(seed)
    values = np.empty(samples, dtype=np.float64)
    step = max(1, (1 << 20) // k)
    for start in range(0, samples, step):
        count = min(step, samples - start)
        values[start : start + count] = l.evaluate_rows(sphere_samples(k, count, rng))
    return float(np.median(values))


def _ascent(l: SymmetricNormOracle, x: np.ndarray, rng: np.random.Generator, sweeps: int) -> float:
    best = l.evaluate(x)
    step = 0.5 / math.sqrt(x.size)
    for _ in range(sweeps):
        improved = False
        for i in rng.choice(x.size, size=min(x.size, 32), replace=False):
            for move in (step, -step):
                y = x.copy()
                y[i] = max(0.0, y[i] + move)
                length = float(np.linalg.norm(y))
                if length == 0.0:
                    continue
                y /= length
                value = l.evaluate(y)
                if value > best + 1e-12:
                    best, x, improved = value, y, True
        if not improved:
            step /= 2
    return best


def estimate_max(l: SymmetricNormOracle, k: int, seed: int = 0, sweeps: int = 20) -> float:
    """
    Maximum of l^(k) on the unit sphere.

    Uses the norm's closed form when it has one. Otherwise returns the best
    of l(xi^(j)) for 1 <= j <= k refined by projected coordinate ascent; that
    value is only a lower bound on the true maximum.
    """
    closed = l.closed_form_max(k)
    if closed is not None:
        return float(closed)
    values = [l.evaluate(xi(j)) for j in range(1, k + 1)]
    j = int(np.argmax(values)) + 1
    start = np.zeros(k)
    start[:j] = xi(j)
    best = max(values[j - 1], _ascent(l, start, np.random.default_rng(seed), sweeps))
    logger.debug("heuristic max of %s at k=%d: %.6g (from xi^(%d))", l.name, k, best, j)
    return float(best)


def _grid_point(l: SymmetricNormOracle, k: int, samples: int, seed: int) -> Tuple[float, float, bool]:
    median = estimate_median(l, k, samples, derive_seed(seed, "concentration", "median", k))
    maximum = estimate_max(l, k, seed=derive_seed(seed, "concentration", "max", k))
    return median, maximum, l.closed_form_max(k) is None


def _remote_grid_point(args: Tuple[Dict[str, Any], int, int, int, int]) -> Tuple[float, float, bool]:
    config, n, k, samples, seed = args
    return _grid_point(norm_from_config(config, n), k, samples, seed)


def compute_mmc(
    l: SymmetricNormOracle,
    n: Optional[int] = None,
    grid_size: Optional[int] = None,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    workers: int = 1,
) -> ConcentrationProfile:
    """
    Profile mc(l^(k)) over a geometric grid and take the maximum.

    Every grid point draws from its own sub-seed, so the profile is the
    same whatever the worker count.

    Args:
        l: Norm oracle
        n: Largest dimension (defaults to l.n)
        grid_size: Optional number of grid points
        samples: Sphere samples per grid point
        seed: Root seed of the profile
        workers: Process count; 1 runs in-process

    Returns:
        ConcentrationProfile
    """
    n = l.n if n is None else n
    if n > l.n:
        raise ValidationError(f"Profile dimension {n} exceeds the norm dimension {l.n}")
    grid = geometric_grid(n, grid_size)
    if workers > 1:
        jobs = [(l.to_config(), l.n, k, samples, seed) for k in grid]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_remote_grid_point, jobs))
    else:
        points = [_grid_point(l, k, samples, seed) for k in grid]
    medians = [p[0] for p in points]
    maxima = [p[1] for p in points]
    mc = [mx / md if md > 0 else math.inf for md, mx in zip(medians, maxima)]
    profile = ConcentrationProfile(
        norm=l.to_config(),
        n=n,
        grid=grid,
        medians=medians,
        maxima=maxima,
        mc=mc,
        heuristic=[p[2] for p in points],
        mmc_estimate=float(max(mc)),
        samples_per_k=samples,
        seed=seed,
    )
    logger.info(
        "profiled %s at n=%d: mmc=%.4g (peak at k=%d)", l.name, n, profile.mmc_estimate,
        profile.peak_dimension(),
    )
    return profile


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log(ys) against log(xs)."""
    slope, _ = np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)
    return float(slope)
