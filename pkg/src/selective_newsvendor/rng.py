"""SplitMix64 pseudo-random stream used for instance generation.

The generator is pinned to a specific published algorithm (SplitMix64,
Steele/Lea/Flood finalizer constants) rather than a library RNG so that any
reimplementation, in any language, can reproduce instances byte for byte from
the same seed.  Draw conventions:

* ``next_float`` returns the top 53 bits scaled into [0, 1);
* real uniforms are half-open, ``lo + u * (hi - lo)``;
* integer uniforms are inclusive, ``lo + floor(u * (hi - lo + 1))``;
* independent named substreams derive from ``(seed, stream index)`` so that
  changing how one field is drawn never shifts another field's draws.

Known-answer vectors for seed 0 are asserted in the test suite.
"""
from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 output finalizer: avalanche a 64-bit word."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Sequential SplitMix64 stream."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def next_float(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform(self, lo: float, hi: float) -> float:
        """Real uniform on the half-open interval [lo, hi)."""
        return lo + self.next_float() * (hi - lo)

    def uniform_int(self, lo: int, hi: int) -> int:
        """Integer uniform on the inclusive range [lo, hi]."""
        return lo + int(self.next_float() * (hi - lo + 1))


def substream(seed: int, index: int) -> SplitMix64:
    """Independent stream number ``index`` derived from a root seed."""
    return SplitMix64(mix64((seed ^ (index * _GOLDEN)) & _MASK64))


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic child seed from a root seed and integer keys."""
    h = mix64(seed)
    for k in keys:
        h = mix64((h ^ mix64(k & _MASK64)) & _MASK64)
    return h
