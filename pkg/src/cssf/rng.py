"""Seeded random streams.

Every stream is a Philox-4x64 counter generator keyed by a ``SeedSequence``
built from the master seed plus a tuple of tags, e.g.
``stream(seed, "thermal", trial, l, m)``. String tags are hashed with CRC32
so the key is stable across platforms and Python versions.
"""
from __future__ import annotations

import zlib

import numpy as np


def _tag(t) -> int:
    if isinstance(t, str):
        return zlib.crc32(t.encode("utf-8"))
    return int(t)


def seed_key(seed, *tags) -> list[int]:
    if seed is None:
        raise ValueError("an explicit seed is required")
    if isinstance(seed, (list, tuple)):
        base = [_tag(s) for s in seed]
    else:
        base = [int(seed)]
    return base + [_tag(t) for t in tags]


def stream(seed, *tags) -> np.random.Generator:
    """Independent generator for ``(seed, *tags)``."""
    ss = np.random.SeedSequence(seed_key(seed, *tags))
    return np.random.Generator(np.random.Philox(ss))


def trial_seed(seed, trial: int) -> list[int]:
    """Seed for the ``trial``-th Monte Carlo run of an experiment."""
    return seed_key(seed, "trial", trial)
