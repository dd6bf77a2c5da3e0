"""Counter-based random streams and the chunked Monte Carlo driver.

Sample ``i`` always belongs to chunk ``i // CHUNK`` and every chunk draws
from its own stream derived from ``(seed, chunk)``. Per-sample values are
concatenated in index order before reduction, so results do not depend on
the number of worker threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

CHUNK = 1024


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(chunk),))
    return np.random.Generator(np.random.PCG64(ss))


def run_chunked(
    fn: Callable[[np.random.Generator, int], np.ndarray],
    samples: int,
    seed: int,
    threads: int = 1,
) -> np.ndarray:
    """Evaluate ``fn(rng, count)`` chunk by chunk and return all per-sample values."""
    sizes = [min(CHUNK, samples - start) for start in range(0, samples, CHUNK)]

    def work(i):
        return np.asarray(fn(chunk_rng(seed, i), sizes[i]), dtype=float)

    if threads is None or threads <= 1 or len(sizes) == 1:
        parts = [work(i) for i in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, range(len(sizes))))
    return np.concatenate(parts) if parts else np.empty(0)


def mean_and_stderr(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    # np.sum uses pairwise summation in a fixed order
    mean = float(np.sum(values) / values.size)
    if values.size < 2:
        return mean, 0.0
    var = float(np.sum((values - mean) ** 2) / (values.size - 1))
    return mean, float(np.sqrt(var / values.size))
