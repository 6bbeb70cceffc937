"""Monte Carlo harness utilities.

Trials are split into fixed-size chunks that are processed (possibly by a
worker pool) and combined in chunk order.  Per-trial RNG streams depend only
on (master seed, trial index), and chunk boundaries do not depend on the
worker count, so every aggregate is bit-identical for 1 or N workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

CHUNK_TRIALS = 256


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo mean with its standard error."""

    mean: float
    se: float
    trials: int
    seed: int


def mean_se(total, total_sq, n: int) -> tuple[float, float]:
    """Mean and standard error (sample std / sqrt(n)) from exact sums."""
    if n == 0:
        return math.nan, math.nan
    mean = total / n
    if n < 2:
        return mean, 0.0
    var = (total_sq - n * mean * mean) / (n - 1)
    return mean, math.sqrt(max(var, 0.0) / n)


def run_chunks(fn, payload, trials: int, workers: int = 1) -> list:
    """Apply ``fn((payload, lo, hi))`` over fixed-size trial chunks.

    Returns chunk results in chunk order.  ``fn`` must be a picklable
    top-level function when workers > 1.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    args = [
        (payload, lo, min(lo + CHUNK_TRIALS, trials))
        for lo in range(0, trials, CHUNK_TRIALS)
    ]
    if workers <= 1 or len(args) == 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=min(workers, len(args))) as pool:
        return list(pool.map(fn, args, chunksize=max(1, len(args) // (4 * workers))))


def crossing_point(xs, ys_a, ys_b) -> float:
    """Abscissa where two sampled curves cross, by linear interpolation of
    their difference at the first sign change."""
    if len(xs) != len(ys_a) or len(xs) != len(ys_b):
        raise ValueError("curves must share the sample grid")
    diffs = [a - b for a, b in zip(ys_a, ys_b)]
    for i in range(len(diffs) - 1):
        d0, d1 = diffs[i], diffs[i + 1]
        if d0 == 0.0:
            return float(xs[i])
        if d0 * d1 < 0.0:
            t = d0 / (d0 - d1)
            return float(xs[i] + t * (xs[i + 1] - xs[i]))
    if diffs[-1] == 0.0:
        return float(xs[-1])
    raise ValueError("curves do not cross on the sampled grid")
