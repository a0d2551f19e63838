"""Deterministic 64-bit PRNG used everywhere randomness is needed.

Every sampling decision in the toolkit flows through this generator so that
artifacts are byte-identical across reruns and across platforms. The
recurrence is fixed and must not change:

    state <- state + 0x9E3779B97F4A7C15          (mod 2^64)
    z <- state
    z <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9    (mod 2^64)
    z <- (z ^ (z >> 27)) * 0x94D049BB133111EB    (mod 2^64)
    output z ^ (z >> 31)

Bounded draws are `output mod n`; the tiny modulo bias is accepted at the
data scales this toolkit targets.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

T = TypeVar("T")


class Rng:
    """Seedable generator with value-semantics state (one 64-bit integer)."""

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def randbelow(self, n: int) -> int:
        """Uniform-ish integer in [0, n). Normative bounded draw: output mod n."""
        if n <= 0:
            raise ValueError(f"randbelow requires n >= 1, got {n}")
        return self.next_u64() % n

    def random(self) -> float:
        """Float in [0, 1) built from the top 53 bits of one output."""
        return (self.next_u64() >> 11) * 2.0**-53

    def coin(self) -> bool:
        """Fair coin via a bounded draw (used for 'equal probability' choices)."""
        return self.randbelow(2) == 1

    def choice(self, seq: Sequence[T]) -> T:
        if not seq:
            raise ValueError("choice on empty sequence")
        return seq[self.randbelow(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, iterating from the last index down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, seq: Sequence[T], k: int) -> list[T]:
        """k distinct elements via partial Fisher-Yates from the front.

        Draw i (0-based) swaps position i with position i + randbelow(n - i);
        the first k positions are returned in swap order.
        """
        n = len(seq)
        if not 0 <= k <= n:
            raise ValueError(f"sample size {k} out of range for population {n}")
        pool = list(seq)
        for i in range(k):
            j = i + self.randbelow(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def derive(self, *keys: int) -> "Rng":
        """Independent child stream: absorb each key through one PRNG step."""
        return Rng(derive_seed(self.state, *keys))

    def __repr__(self) -> str:  # pragma: no cover
        return f"Rng(state={self.state:#018x})"


def derive_seed(base: int, *keys: int) -> int:
    """Fold keys into a base seed, one generator step per key."""
    s = base & _MASK64
    for k in keys:
        s = Rng((s + (k & _MASK64)) & _MASK64).next_u64()
    return s
