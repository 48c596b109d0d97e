"""Deterministic pseudorandom primitives shared by every seeded stage.

All reproducibility contracts in this package (corpus splits, SGNS
training, Monte-Carlo permutations, set balancing) are defined in terms
of the splitmix64 generator below, so a reimplementation in any language
can reproduce outputs byte for byte.

Algorithm (Steele, Lea & Flood 2014), all arithmetic mod 2**64:

    state  <- state + 0x9E3779B97F4A7C15
    z      <- state
    z      <- (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9
    z      <- (z XOR (z >> 27)) * 0x94D049BB133111EB
    output <- z XOR (z >> 31)

Derived conventions, fixed here once and used everywhere:

* ``next_below(n)`` is ``next_u64() % n``.  The modulo bias is below
  n / 2**64 and irrelevant for the bounds used in this package.
* ``shuffle`` is the Fisher-Yates walk from the last index down to 1,
  drawing ``j = next_below(i + 1)`` and swapping positions i and j.
* ``uniform()`` takes the top 53 bits of one output: ``u64 >> 11`` scaled
  by 2**-53, giving a double in [0, 1).
* ``derive_seed(seed, i)`` is the (i+1)-th raw output of a generator
  seeded with ``seed``, computed in O(1).  It gives independent child
  streams indexed by a counter, so work split across any number of
  workers can reproduce the single-threaded result.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """Finalization mix of splitmix64 (the output stage, minus the increment)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, counter: int) -> int:
    """Child seed for stream `counter`: the (counter+1)-th output of SplitMix64(seed)."""
    return mix64((seed + (counter + 1) * _GOLDEN) & _MASK64)


class SplitMix64:
    """Sequential splitmix64 stream over a 64-bit state."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def next_below(self, bound: int) -> int:
        """Integer in [0, bound) via one draw reduced modulo `bound`."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        return self.next_u64() % bound

    def uniform(self) -> float:
        """Double in [0, 1) from the top 53 bits of one draw."""
        return (self.next_u64() >> 11) * 2.0**-53

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle, high index to low."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), by partial Fisher-Yates selection."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} from {n} items")
        pool = list(range(n))
        for i in range(k):
            j = i + self.next_below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
