"""Seed derivation.

Every random stream is a PCG64 generator seeded through
``numpy.random.SeedSequence(entropy=(master_seed, *keys))``. PCG64 and
SeedSequence are bit-stable across platforms, so realization ``r`` of a run
with master seed ``S`` always draws from ``SeedSequence((S, r))`` no matter
which worker computes it or in which order.  String keys are mapped to a
stable 32-bit integer (CRC32) so that distinct purposes (fields, matched
ensembles, calibration) never share a stream.
"""

from __future__ import annotations

import zlib
from typing import Sequence, Union

import numpy as np

SeedLike = Union[int, Sequence[int], np.random.Generator]


def _key(k) -> int:
    if isinstance(k, str):
        return zlib.crc32(k.encode("utf-8"))
    k = int(k)
    if k < 0:
        raise ValueError(f"seed components must be non-negative, got {k}")
    return k


def derive_rng(master_seed: int, *keys) -> np.random.Generator:
    entropy = [_key(master_seed)] + [_key(k) for k in keys]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def as_rng(seed: SeedLike) -> np.random.Generator:
    """Accept an int, a tuple of ints (master, *keys) or a ready Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (tuple, list)):
        return derive_rng(*seed)
    return derive_rng(seed)
