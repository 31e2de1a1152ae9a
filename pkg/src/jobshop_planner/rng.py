"""Portable SplitMix64 stream.

The compiled kernel reimplements the same recurrence so that random rollouts
consume identical draws on both backends.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def stream_seed(seed: int, name: str) -> int:
    """Derive an independent 64-bit seed for a named concern (rollouts, policy, ...)."""
    tag = int.from_bytes(name.encode()[:8].ljust(8, b"\0"), "little")
    ss = np.random.SeedSequence([int(seed) & _MASK, tag])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, state: int) -> None:
        self.state = int(state) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        # multiply-shift on the upper 32 bits; identical in the C kernel
        return ((self.next_u64() >> 32) * n) >> 32

    def copy(self) -> "SplitMix64":
        return SplitMix64(self.state)
