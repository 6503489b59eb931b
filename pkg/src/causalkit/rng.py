"""Portable seeded random streams for reproducible data generation.

SplitMix64 is the core generator: a counter-based 64-bit mix function, so
the k-th draw is a pure function of (seed, k). Output is byte-identical
across platforms and numpy versions, which numpy's own Generator does not
guarantee between releases. Normal variates are produced by Box-Muller on
this stream rather than by any platform library.
"""

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_TWO53 = float(1 << 53)


class SplitMix64:
    """Seedable counter-based generator over uint64 with float helpers."""

    def __init__(self, seed: int):
        self._seed = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
        self._count = 0

    def u64(self, n: int) -> np.ndarray:
        """Next ``n`` raw 64-bit words of the stream."""
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        x = self._seed + idx * _GAMMA
        x = (x ^ (x >> np.uint64(30))) * _MIX1
        x = (x ^ (x >> np.uint64(27))) * _MIX2
        return x ^ (x >> np.uint64(31))

    def uniform(self, n, low=0.0, high=1.0):
        """n uniforms in [low, high), 53-bit resolution."""
        u = (self.u64(n) >> np.uint64(11)).astype(np.float64) / _TWO53
        return low + (high - low) * u

    def normal(self, n, mean=0.0, std=1.0):
        # Box-Muller; first uniform mapped into (0, 1] so log() is finite.
        m = (n + 1) // 2
        raw = self.u64(2 * m)
        u1 = ((raw[:m] >> np.uint64(11)).astype(np.float64) + 1.0) / (_TWO53 + 1.0)
        u2 = (raw[m:] >> np.uint64(11)).astype(np.float64) / _TWO53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = (2.0 * np.pi) * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        return mean + std * z

    def integers(self, n, k):
        """n draws uniform over {0, ..., k-1}. Modulo bias < k/2**64."""
        return (self.u64(n) % np.uint64(k)).astype(np.int64)

    def choice(self, values, n):
        vals = np.asarray(values)
        return vals[self.integers(n, len(vals))]
