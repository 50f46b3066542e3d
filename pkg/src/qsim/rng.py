"""Deterministic sampling primitives: splitmix64 and inverse-CDF draws.

The generator is splitmix64, chosen because the whole algorithm fits in a
few lines and can be reimplemented bit-for-bit in any language (see
docs/PRNG.md for the written-out recurrence). Draw i of a stream seeded
with s is

    mix64((s + (i+1) * 0x9E3779B97F4A7C15) mod 2^64)

where mix64 is the splitmix64 finalizer. Because each draw depends only on
its index, the whole stream is computed vectorized with exactly the same
values a sequential loop would produce.

Uniform doubles take the top 53 bits: u = (x >> 11) * 2^-53, giving values
in [0, 1). Inverse-CDF sampling maps u to the first outcome index i with
u < cdf[i]; any u at or beyond the final cumulative value (possible when
the probabilities sum to slightly less than 1) yields the last index.
"""

from __future__ import annotations

import numpy as np

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_MULT_1 = 0xBF58476D1CE4E5B9
MIX_MULT_2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1


def splitmix64_stream(seed: int, count: int) -> np.ndarray:
    """The first `count` raw 64-bit outputs for the given seed."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    with np.errstate(over="ignore"):
        idx = np.arange(1, count + 1, dtype=np.uint64)
        z = np.uint64(seed & _MASK64) + idx * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_MULT_1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_MULT_2)
        return z ^ (z >> np.uint64(31))


def uniforms(seed: int, count: int) -> np.ndarray:
    """`count` doubles in [0, 1) from the splitmix64 stream."""
    bits = splitmix64_stream(seed, count) >> np.uint64(11)
    return bits.astype(np.float64) * 2.0**-53


def inverse_cdf_sample(probabilities, shots: int, seed: int) -> np.ndarray:
    """Outcome indices for `shots` i.i.d. draws from a finite distribution.

    The draw for uniform u is the first index i with u < cdf[i]; indices are
    clipped to the last outcome to absorb cumulative rounding shortfall.
    """
    p = np.asarray(probabilities, dtype=np.float64)
    if p.ndim != 1 or len(p) == 0:
        raise ValueError("probabilities must be a nonempty 1-D array")
    cdf = np.cumsum(p)
    u = uniforms(seed, shots)
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(p) - 1)
