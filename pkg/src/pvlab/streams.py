"""Per-simulation random streams.

Seeds are derived with the SplitMix64 finaliser so that stream ``k`` of
simulation ``i`` depends only on ``(master_seed, i, k)``, never on execution
order::

    mix(x)  = splitmix64(x)                      # one SplitMix64 output step
    derive(seed, k1, k2, ...) = mix(... mix(mix(seed) ^ k1) ^ k2 ...)

Each derived 64-bit value seeds a numpy ``PCG64`` generator.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *keys: int) -> int:
    s = splitmix64(seed & MASK64)
    for k in keys:
        s = splitmix64(s ^ (k & MASK64))
    return s


def stream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *keys)))
