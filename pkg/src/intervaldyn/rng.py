"""Deterministic 64-bit generator (SplitMix64).

Sampling code uses this fixed, documented generator instead of the stdlib
Mersenne twister so that seeded runs produce identical streams in any
implementation of the same algorithm:

    state <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z <- state
    z <- (z xor (z >> 30)) * 0xBF58476D1CE4E5B9   (mod 2^64)
    z <- (z xor (z >> 27)) * 0x94D049BB133111EB   (mod 2^64)
    output z xor (z >> 31)

Uniform doubles take the top 53 bits: (z >> 11) * 2^-53.
"""

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & _MASK

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self, lo=0.0, hi=1.0):
        u = self.next_u64() >> 11
        return lo + (hi - lo) * (u * 2.0 ** -53)
