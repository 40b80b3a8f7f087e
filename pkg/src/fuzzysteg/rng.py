"""SplitMix64 generator: every reproducible random draw in the package comes from here.

The constants are the published two-round xor-shift-multiply mix; state
advances by the 64-bit golden-ratio increment. Because output k is a pure
function of ``seed + k * GOLDEN``, whole batches can be produced with
vectorized uint64 arithmetic.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """Finalizing mix applied to the raw state."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Deterministic 64-bit PRNG with batch (vectorized) output."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return self.next_u64() % n

    def take_u64(self, count: int) -> np.ndarray:
        """The next `count` outputs as a uint64 array (state advances by count)."""
        if count <= 0:
            return np.empty(0, dtype=np.uint64)
        ks = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + ks * np.uint64(GOLDEN)
            self.state = int(z[-1])
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
            z = z ^ (z >> np.uint64(31))
        return z

    def take_floats(self, count: int) -> np.ndarray:
        """`count` uniforms in [0, 1)."""
        return (self.take_u64(count) >> np.uint64(11)) * 2.0**-53

    def take_normals(self, count: int) -> np.ndarray:
        """`count` standard normals via Box-Muller."""
        half = (count + 1) // 2
        u1 = self.take_floats(half)
        u2 = self.take_floats(half)
        r = np.sqrt(-2.0 * np.log1p(-u1))
        theta = (2.0 * np.pi) * u2
        return np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:count]

    def take_bytes(self, count: int) -> bytes:
        """`count` bytes (big-endian serialization of whole u64 outputs)."""
        if count <= 0:
            return b""
        words = self.take_u64((count + 7) // 8)
        return words.astype(">u8").tobytes()[:count]
