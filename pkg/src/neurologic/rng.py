"""Deterministic PCG32 generator used everywhere randomness is needed.

The generator is pinned down exactly so that any language can replay the
same stream (see README for the reference description):

  state' = state * 6364136223846793005 + inc          (mod 2^64)
  output = rotr32((((state >> 18) ^ state) >> 27) & 0xffffffff, state >> 59)

where `output` is computed from the state *before* the step and
``inc = (stream << 1) | 1``.  Seeding follows the reference recipe:
state = 0; step; state += seed; step.

Floats in [0, 1) are ``next_u32() * 2**-32`` (32 bits of resolution, which
is plenty for initialization and shuffling).  Bounded integers use the
standard rejection method so the stream stays bias-free.
"""

MASK64 = (1 << 64) - 1
MULT = 6364136223846793005
DEFAULT_STREAM = 54


class Pcg32:
    def __init__(self, seed, stream=DEFAULT_STREAM):
        self.inc = (((stream & MASK64) << 1) | 1) & MASK64
        self.state = 0
        self._step()
        self.state = (self.state + (seed & MASK64)) & MASK64
        self._step()

    def _step(self):
        self.state = (self.state * MULT + self.inc) & MASK64

    def next_u32(self):
        old = self.state
        self._step()
        xorshifted = (((old >> 18) ^ old) >> 27) & 0xFFFFFFFF
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & 0xFFFFFFFF

    def next_f64(self):
        """Uniform double in [0, 1)."""
        return self.next_u32() * 2.0 ** -32

    def uniform(self, lo, hi):
        return lo + (hi - lo) * self.next_f64()

    def bounded(self, n):
        """Uniform integer in [0, n) without modulo bias."""
        if n <= 0:
            raise ValueError("bound must be positive")
        threshold = (-n) % n
        while True:
            r = self.next_u32()
            if r >= threshold:
                return r % n

    def shuffle(self, items):
        """In-place Fisher-Yates shuffle (descending index order)."""
        for i in range(len(items) - 1, 0, -1):
            j = self.bounded(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def permutation(self, n):
        return self.shuffle(list(range(n)))
