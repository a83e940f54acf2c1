"""Deterministic seed derivation.

Bulk randomness comes from numpy's PCG64 bit generator; sub-seeds for
realizations, trials, and worker tasks are derived from a master seed with
SplitMix64 mixing. The same (master, parts) always yields the same sub-seed,
so results do not depend on worker count or scheduling order. Outputs that
carry run metadata record the generator under ``GENERATOR_NAME``.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

GENERATOR_NAME = "numpy-pcg64"


def _mix(z: int) -> int:
    # SplitMix64 finalizer (Steele, Lea & Flood's constants).
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _as_int(part) -> int:
    if isinstance(part, str):
        return int.from_bytes(part.encode("utf-8"), "little")
    return int(part)


def mix_seed(master: int, *parts) -> int:
    """Fold `parts` (ints or short strings) into a 64-bit sub-seed.

    Each part is absorbed with one SplitMix64 round:
        state <- mix((state + GOLDEN) ^ part)
    followed by a final mix, all modulo 2^64.
    """
    state = int(master) & _MASK64
    for part in parts:
        state = _mix(((state + _GOLDEN) & _MASK64) ^ (_as_int(part) & _MASK64))
    return _mix((state + _GOLDEN) & _MASK64)


def make_rng(seed: int) -> np.random.Generator:
    """A PCG64-backed generator for the given 64-bit seed."""
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))
