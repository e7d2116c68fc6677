"""Seeded random streams: splitmix64 derivation feeding xoshiro256**.

Reproducibility contract: the same seed yields the same draw sequence on
any machine running this package. No cross-library bit compatibility is
promised (uniforms use a 53-bit mantissa, Gaussians use Box-Muller, both
of which differ between implementations).
"""

import numpy as np

from . import _kernels

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15

ALGORITHM = "splitmix64+xoshiro256**"


def splitmix64(value: int) -> int:
    """One splitmix64 output for the given 64-bit input."""
    value = (value + _GOLDEN) & _MASK
    z = value
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, *indices: int) -> int:
    """Fold integer indices into a seed, e.g. (master, method, trial)."""
    s = seed & _MASK
    for idx in indices:
        s = splitmix64(s)
        s = splitmix64(s ^ (idx & _MASK))
    return s


class RngStream:
    """Single-owner random stream. Not safe to share across threads.

    Parallel work should derive one stream per task from a master seed
    with derive_seed / spawn.
    """

    algorithm = ALGORITHM

    def __init__(self, seed: int):
        self.seed = seed & _MASK
        words = []
        s = self.seed
        for _ in range(4):
            s = (s + _GOLDEN) & _MASK
            z = s
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
            words.append(z ^ (z >> 31))
        if not any(words):
            words[0] = _GOLDEN  # xoshiro state must be nonzero
        self.state = np.array(words, dtype=np.uint64)

    def spawn(self, *indices: int) -> "RngStream":
        return RngStream(derive_seed(self.seed, *indices))

    def next_u64(self) -> int:
        return int(_kernels.xoshiro_next(self.state))

    def uniform(self, size=None):
        """Uniform floats in [0, 1)."""
        if size is None:
            return float(_kernels.uniform_next(self.state))
        out = np.empty(int(size), dtype=np.float64)
        _kernels.fill_uniform(self.state, out)
        return out

    def normal(self, size=None):
        """Standard normal floats (Box-Muller pairs)."""
        if size is None:
            out = np.empty(1, dtype=np.float64)
            _kernels.fill_normal(self.state, out)
            return float(out[0])
        out = np.empty(int(size), dtype=np.float64)
        _kernels.fill_normal(self.state, out)
        return out

    def integers(self, n: int, size=None):
        """Unbiased integers in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        if size is None:
            return int(_kernels.bounded_next(self.state, n))
        return np.array(
            [int(_kernels.bounded_next(self.state, n)) for _ in range(int(size))],
            dtype=np.int64,
        )
