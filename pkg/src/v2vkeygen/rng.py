"""Hierarchical deterministic random streams.

Every stochastic operation in the package takes an explicit
``numpy.random.Generator``.  Experiments derive independent sub-streams
from a master seed and a label path, so that trials and pipeline stages
can run in any order (or concurrently) without changing results.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["substream", "derive_seed"]


def _path_key(item: int | str) -> int:
    if isinstance(item, str):
        digest = hashlib.blake2b(item.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big")
    if item < 0:
        raise ValueError("stream path integers must be non-negative")
    return int(item)


def substream(master_seed: int, *path: int | str) -> np.random.Generator:
    """Generator for the sub-stream identified by ``(master_seed, *path)``.

    Path items may be trial indices, stage labels ("channel", "noise", ...)
    or block counters.  Distinct paths give statistically independent
    streams; identical paths always reproduce the same stream.
    """
    entropy = [int(master_seed) & 0xFFFFFFFFFFFFFFFF]
    entropy.extend(_path_key(p) for p in path)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(master_seed: int, *path: int | str) -> int:
    """64-bit integer seed derived from ``(master_seed, *path)``.

    Used where an API wants a plain seed (interleavers, hashes) rather
    than a Generator.
    """
    ss = np.random.SeedSequence(
        [int(master_seed) & 0xFFFFFFFFFFFFFFFF] + [_path_key(p) for p in path]
    )
    return int(ss.generate_state(1, dtype=np.uint64)[0])
