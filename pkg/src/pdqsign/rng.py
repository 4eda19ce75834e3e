"""Deterministic random substreams.

Every random draw in a study is addressed by ``(master seed, replication,
purpose)``. Streams come from :class:`numpy.random.SeedSequence` with the
address as entropy, feeding a counter-based Philox bit generator, so the
draws of one replication never depend on how many workers ran or which
other replications ran first.
"""

from __future__ import annotations

import zlib

import numpy as np

PURPOSES = ("data1", "data2", "boot", "oracle", "aux")


def _purpose_key(purpose: str | int) -> int:
    if isinstance(purpose, int):
        return purpose
    # crc32 is stable across processes, unlike hash()
    return zlib.crc32(purpose.encode("utf-8"))


def substream(seed: int, *path: str | int) -> np.random.Generator:
    """Generator for the stream at ``(seed, *path)``.

    >>> a = substream(7, 3, "boot").standard_normal()
    >>> b = substream(7, 3, "boot").standard_normal()
    >>> a == b
    True
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_purpose_key(p) for p in path]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an int seed, or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.Generator(np.random.Philox())
    if isinstance(rng, (int, np.integer)):
        return substream(int(rng))
    raise TypeError(f"cannot make a Generator from {type(rng).__name__}")
