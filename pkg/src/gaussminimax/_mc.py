"""Chunked, counter-seeded Monte Carlo.

A run of ``n_samples`` draws is split into fixed-size chunks. Chunk ``k`` of
stream ``s`` draws from ``default_rng([seed, s, k])``, so its numbers depend
only on ``(seed, s, k)``. Chunk size depends on the dimension alone, and
partial results are reduced in chunk order, so results are bit-identical for
any number of workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")

# Keeps one chunk of standard normals near 32 MiB.
_CHUNK_ENTRIES = 1 << 22

# Stream tags, mixed into the seed so different roles never share draws.
NULL = 0
NULL_CHECK = 1
ALTERNATIVE = 2
RATIO = 3


def chunk_rows(dim: int) -> int:
    return max(256, _CHUNK_ENTRIES // max(1, dim))


def chunk_sizes(n_samples: int, dim: int) -> list[int]:
    rows = chunk_rows(dim)
    full, rest = divmod(int(n_samples), rows)
    return [rows] * full + ([rest] if rest else [])


def chunk_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, stream, index])


def map_chunks(
    fn: Callable[[np.random.Generator, int], T],
    n_samples: int,
    dim: int,
    seed: int,
    stream: int,
    workers: int = 1,
) -> list[T]:
    """Apply ``fn(rng, rows)`` to every chunk; results come back in chunk order."""
    sizes = chunk_sizes(n_samples, dim)

    def run(k: int) -> T:
        return fn(chunk_rng(seed, stream, k), sizes[k])

    if workers <= 1 or len(sizes) <= 1:
        return [run(k) for k in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(sizes))))


def logsumexp_pair(parts: list[tuple[float, float]]) -> tuple[float, float]:
    """Ordered reduction of per-chunk ``(log sum w, log sum w^2)`` pairs."""
    s1, s2 = -np.inf, -np.inf
    for a, b in parts:
        s1 = np.logaddexp(s1, a)
        s2 = np.logaddexp(s2, b)
    return float(s1), float(s2)
