"""Counter-based random number generation for reproducible replicas.

Every stochastic component draws from a :class:`StreamRNG`, a splitmix64
stream keyed by a 64-bit seed.  The n-th draw of a stream is a pure
function of (key, n), so independently seeded replicas can be executed
serially, in parallel, or inside compiled batch kernels and still consume
bit-identical random sequences.  Replica i of a run with base seed s uses
the stream keyed by (s + i) mod 2**64.
"""

from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1DD3E7B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53

GENERATOR_NAME = "splitmix64"


def mix64(z: int) -> int:
    """splitmix64 output function: avalanche a 64-bit state word."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, replica: int) -> int:
    """Key of the replica-th stream derived from a base seed."""
    return (seed + replica) & MASK64


class StreamRNG:
    """splitmix64 stream with an explicit draw counter.

    Compatible with the draw discipline of the compiled batch engines:
    draw n (0-based) equals mix64(key + (n+1) * GOLDEN).
    """

    __slots__ = ("key", "_state", "draws")

    def __init__(self, key: int):
        self.key = key & MASK64
        self._state = key & MASK64
        self.draws = 0

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN) & MASK64
        self.draws += 1
        return mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        k = int(self.random() * n)
        return k if k < n else n - 1

    def spawn(self, index: int) -> "StreamRNG":
        """Decorrelated child stream (for nested replica structures)."""
        return StreamRNG(mix64(self.key ^ mix64(index + 1)))
