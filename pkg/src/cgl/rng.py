"""Counter-based deterministic random numbers (splitmix64).

Every random draw in this package comes from a single 64-bit generator so
that sweeps and certificates reproduce bit-for-bit across runs and across
implementations in other languages.  The update is the splitmix64 finalizer
applied to ``seed + (counter+1)*GOLDEN`` (all arithmetic mod 2^64):

    x  = seed + (counter + 1) * 0x9E3779B97F4A7C15
    x ^= x >> 30;  x *= 0xBF58476D1CE4E5B9
    x ^= x >> 27;  x *= 0x94D049BB133111EB
    x ^= x >> 31

Uniform doubles are ``x / 2^64`` in [0, 1).  The generator is pure in
(seed, counter), so any sample in a sweep can be regenerated in isolation.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_TWO64 = float(2.0**64)


def _mix(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= _MIX1
    x ^= x >> np.uint64(27)
    x *= _MIX2
    x ^= x >> np.uint64(31)
    return x


def raw(seed: int, counters) -> np.ndarray:
    """splitmix64 words for an array of counters (vectorized, random access)."""
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + (c + np.uint64(1)) * _GOLDEN)


class Rng:
    """Sequential view over the counter-based stream.

    ``Rng(seed).uniform(n)`` consumes n counters; two Rng objects with the
    same seed produce identical streams.  ``substream(tag)`` derives an
    independent seed, so parallel sweep cells stay decoupled.
    """

    def __init__(self, seed: int, counter: int = 0):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.counter = int(counter)

    def substream(self, tag: int) -> "Rng":
        sub = int(raw(self.seed ^ 0xD1B54A32D192ED03, [tag])[0])
        return Rng(sub)

    def _take(self, n: int) -> np.ndarray:
        idx = np.arange(self.counter, self.counter + n, dtype=np.uint64)
        self.counter += n
        return raw(self.seed, idx)

    def uniform(self, n: int = 1, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        u = self._take(n).astype(np.float64) / _TWO64
        return lo + (hi - lo) * u

    def normal(self, n: int = 1) -> np.ndarray:
        # Box-Muller on two uniform draws per sample.
        u1 = np.maximum(self.uniform(n), 1e-300)
        u2 = self.uniform(n)
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)

    def complex_box(self, n: int = 1, scale: float = 1.0) -> np.ndarray:
        """Uniform complex samples in the square [-scale, scale]^2."""
        re = self.uniform(n, -scale, scale)
        im = self.uniform(n, -scale, scale)
        return re + 1j * im

    def complex_normal(self, n: int = 1, scale: float = 1.0) -> np.ndarray:
        return scale * (self.normal(n) + 1j * self.normal(n))

    def integers(self, n: int, lo: int, hi: int) -> np.ndarray:
        """Integers in [lo, hi), computed as floor of uniform (tiny modulo bias-free)."""
        u = self._take(n)
        span = np.uint64(hi - lo)
        return (lo + (u % span).astype(np.int64)).astype(np.int64)
