"""Deterministic substream derivation from a single 64-bit master seed.

Every random draw in the package comes from a generator built by
:func:`substream`, keyed by ``(seed, label, index)``.  The mixing is done by
:class:`numpy.random.SeedSequence`, so two different keys give statistically
independent streams and results never depend on execution order.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def label_code(label: str) -> int:
    """Stable 32-bit integer code for a stream label."""
    return zlib.crc32(label.encode("utf-8"))


def substream(seed: int, label: str, index: int = 0) -> np.random.Generator:
    """Generator for the stream named ``label`` at position ``index``."""
    if index < 0:
        raise ValueError(f"stream index must be nonnegative, got {index}")
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=(label_code(label), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an integer seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
