"""Deterministic, counter-addressable Gaussian noise generator.

Draw ``k`` of a noise stream is a pure function of ``(seed, k)``: two
64-bit words from a splitmix64 sequence feed one Box-Muller transform.
Because draws are addressed by counter instead of consumed from shared
state, simulations are reproducible bitwise across runs, across
processes, and across the compiled and pure Python kernels (which embed
the same integer arithmetic).

Algorithm, normatively:

*  word ``i``:  ``z = seed + (i + 1) * 0x9E3779B97F4A7C15  (mod 2^64)``,
   then the splitmix64 finalizer
   ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
   z *= 0x94D049BB133111EB; z ^= z >> 31``.
*  uniform ``i``: ``((word_i >> 11) + 0.5) * 2**-53``, strictly inside
   (0, 1) so the Box-Muller logarithm is always finite.
*  gauss ``k``:  ``sqrt(-2 ln u_{2k}) * cos(2 pi u_{2k+1})``.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0  # exact 2**-53
_TWO_PI = 6.283185307179586


def splitmix64(seed: int, i: int) -> int:
    """Word ``i`` of the splitmix64 stream for ``seed``, as uint64."""
    z = (seed + (i + 1) * _GAMMA) & _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def uniform01(seed: int, i: int) -> float:
    """Uniform draw ``i`` on the open interval (0, 1)."""
    return ((splitmix64(seed, i) >> 11) + 0.5) * _INV_2_53


def gauss(seed: int, k: int) -> float:
    """Standard normal draw ``k`` of the stream for ``seed``."""
    u1 = uniform01(seed, 2 * k)
    u2 = uniform01(seed, 2 * k + 1)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)
