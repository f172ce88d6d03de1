"""Seed derivation and ordered replicate mapping."""
from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "SKFLT_THREADS"


def _tag_int(tag) -> int:
    if isinstance(tag, int):
        return tag
    return zlib.crc32(str(tag).encode("utf-8"))


def replicate_seed(seed: int, tag, k: int) -> np.random.SeedSequence:
    """Independent stream for replicate ``k`` of experiment ``tag`` under master ``seed``."""
    if seed < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed}")
    return np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, _tag_int(tag), int(k)])


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (int, np.integer)) and seed < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed}")
    return np.random.default_rng(seed)


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    return os.cpu_count() or 1


def map_replicates(fn, reps: int, seed: int, tag) -> list:
    """Evaluate ``fn(k, seed_sequence)`` for ``k`` in ``range(reps)``.

    Results come back in replicate order whatever the worker count, so
    reductions over them are reproducible.
    """
    workers = min(worker_count(), max(reps, 1))
    seeds = [replicate_seed(seed, tag, k) for k in range(reps)]
    if workers <= 1:
        return [fn(k, s) for k, s in enumerate(seeds)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(reps), seeds))
