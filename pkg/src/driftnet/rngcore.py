"""Counter-based random number streams.

Every random quantity in the engine is addressable: a stream is a 64-bit
key plus a draw counter, and keys for (replica, column, purpose) are derived
by hashing, never by consuming draws.  This is what makes replicated runs
deterministic regardless of scheduling and lets two different algorithms
consume the identical realization of a random field.

The generator is SplitMix64: output n of stream k is mix64(k + (n+1)*GAMMA).
The same primitives are re-implemented on uint64 inside the numba kernels
(see kernels.py); test_rng asserts the two produce identical sequences.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_DERIVE_SALT = 0xA5A5A5A55A5A5A5A


def mix64(z: int) -> int:
    """SplitMix64 finalizer (Stafford mix13)."""
    z &= MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK64
    z ^= z >> 31
    return z


def derive_key(key: int, *indices: int) -> int:
    """Derive a child stream key from a parent key and integer indices.

    Used to give every (replica), (replica, column), (seed, column, side)
    combination its own independent stream without draw-order coupling.
    """
    k = key & MASK64
    for n in indices:
        k = mix64((k ^ _DERIVE_SALT) + ((n & MASK64) * GAMMA & MASK64) & MASK64)
    return k


def stream_u64(key: int, counter: int) -> int:
    """n-th raw output of the stream with the given key (counter = n >= 0)."""
    return mix64((key + ((counter + 1) * GAMMA)) & MASK64)


def u64_to_unit(x: int) -> float:
    """Map a 64-bit word to a uniform in the open interval (0, 1)."""
    return ((x >> 11) + 0.5) * 2.0**-53


class Stream:
    """Sequential view of a counter-based stream.

    Cheap to construct; state is just (key, counter).  Distribution
    methods consume a fixed, documented number of raw draws so that
    parallel replays stay aligned.
    """

    __slots__ = ("key", "counter")

    def __init__(self, key: int, counter: int = 0):
        self.key = key & MASK64
        self.counter = counter

    def child(self, *indices: int) -> "Stream":
        return Stream(derive_key(self.key, *indices))

    def u64(self) -> int:
        x = stream_u64(self.key, self.counter)
        self.counter += 1
        return x

    def uniform(self) -> float:
        return u64_to_unit(self.u64())

    def exponential(self, rate: float = 1.0) -> float:
        return -math.log(self.uniform()) / rate

    def normal(self) -> float:
        # Box-Muller, cosine branch only; two draws per variate.
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def bernoulli(self, p: float) -> bool:
        return self.uniform() < p

    def geometric(self, p: float) -> int:
        """Geometric on {1, 2, ...} with success probability p."""
        if p >= 1.0:
            self.counter += 1
            return 1
        u = self.uniform()
        return 1 + int(math.floor(math.log(u) / math.log1p(-p)))

    def truncated_geometric(self, p: float, n: int) -> int:
        """Geometric(p) conditioned on being <= n (n >= 1)."""
        if p >= 1.0:
            self.counter += 1
            return 1
        u = self.uniform()
        q = -math.expm1(n * math.log1p(-p))  # P(G <= n)
        k = 1 + int(math.floor(math.log1p(-u * q) / math.log1p(-p)))
        return min(max(k, 1), n)

    def poisson(self, mean: float) -> int:
        """Exact Poisson draw by CDF inversion (one uniform)."""
        from scipy.stats import poisson as _poisson

        if mean <= 0.0:
            self.counter += 1
            return 0
        u = self.uniform()
        return int(_poisson.ppf(u, mean))


def master_key(master_seed: int) -> int:
    return mix64(master_seed & MASK64)


def replica_stream(master_seed: int, replica: int) -> Stream:
    return Stream(derive_key(master_key(master_seed), replica))
