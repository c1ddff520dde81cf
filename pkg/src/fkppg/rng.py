"""Counter-based uniform generator.

Every uniform is a pure function of the address ``(seed, step, slot, counter)``:

    k0 = splitmix64(seed)
    k1 = splitmix64(k0 ^ 0xD1B54A32D192ED03)
    x  = splitmix64(k0 ^ (step << 32 | slot))
    x  = splitmix64(x ^ k1 ^ counter)
    u  = (x >> 11) * 2**-53                      # in [0, 1)

``splitmix64`` is Steele, Lea & Flood's SplitMix64 output step (increment by
the golden gamma, then the Stafford variant-13 finalizer).  Nothing is stateful,
so particles can be simulated in any order or chunking and still see the same
draws.  ``slot`` is the particle index; resampling uses the reserved slot
``RESAMPLE_SLOT``.

`uniform` is a pure-Python implementation and `uniforms` a numpy one; they are
bit-identical (checked in the test-suite).
"""

import numpy as np

MASK64 = (1 << 64) - 1
MASK32 = (1 << 32) - 1
GAMMA = 0x9E3779B97F4A7C15
MUL1 = 0xBF58476D1CE4E5B9
MUL2 = 0x94D049BB133111EB
KEY_SALT = 0xD1B54A32D192ED03
RESAMPLE_SLOT = MASK32
TWO_M53 = 2.0 ** -53

_GAMMA = np.uint64(GAMMA)
_MUL1 = np.uint64(MUL1)
_MUL2 = np.uint64(MUL2)
_S30, _S27, _S31, _S11, _S32 = (np.uint64(s) for s in (30, 27, 31, 11, 32))


def splitmix64(z):
    z = (z + GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * MUL1) & MASK64
    z = ((z ^ (z >> 27)) * MUL2) & MASK64
    return z ^ (z >> 31)


def _splitmix64_np(z):
    z = z + _GAMMA
    z = (z ^ (z >> _S30)) * _MUL1
    z = (z ^ (z >> _S27)) * _MUL2
    return z ^ (z >> _S31)


class CounterRNG:
    """Stateless uniform source keyed by a 64-bit seed."""

    def __init__(self, seed):
        seed = int(seed)
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
        self.seed = seed
        self._k0 = splitmix64(seed)
        self._k1 = splitmix64(self._k0 ^ KEY_SALT)

    def __repr__(self):
        return f"CounterRNG(seed={self.seed})"

    def uniform(self, step, slot, counter=0):
        x = splitmix64(self._k0 ^ (((step & MASK32) << 32) | (slot & MASK32)))
        x = splitmix64(x ^ self._k1 ^ (counter & MASK32))
        return (x >> 11) * TWO_M53

    def uniforms(self, step, slots, counter=0):
        """Vectorised `uniform` over an array of slots."""
        slots = np.asarray(slots, dtype=np.uint64)
        head = np.uint64(self._k0 ^ ((step & MASK32) << 32))
        x = _splitmix64_np(head ^ slots)
        x = _splitmix64_np(x ^ np.uint64(self._k1 ^ (counter & MASK32)))
        return (x >> _S11).astype(np.float64) * TWO_M53

    def uniforms_by_counter(self, step, slot, counters):
        """Vectorised `uniform` over an array of counters at a fixed slot."""
        counters = np.asarray(counters, dtype=np.uint64)
        head = splitmix64(self._k0 ^ (((step & MASK32) << 32) | (slot & MASK32)))
        x = _splitmix64_np(np.uint64(head ^ self._k1) ^ counters)
        return (x >> _S11).astype(np.float64) * TWO_M53
