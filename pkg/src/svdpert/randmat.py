"""Deterministic test-problem generation.

The random stream is fully pinned so that a seed reproduces the same matrix
on any platform or runtime, independent of library versions:

* 64-bit state update (splitmix-style):
  ``state = (state + 0x9E3779B97F4A7C15) mod 2^64`` then the output is
  ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31`` (all mod 2^64).
* uniforms take the top 53 bits: ``u = (word >> 11) * 2^-53``.
* normals come from Box-Muller pairs consumed in a fixed order: draw word a
  then word b, set ``u1 = ((a >> 11) + 1) * 2^-53`` (strictly positive, so
  the log is safe) and ``u2 = (b >> 11) * 2^-53``, return
  ``sqrt(-2 ln u1) * cos(2 pi u2)`` and cache ``sqrt(-2 ln u1) * sin(2 pi u2)``
  for the next call.  The cache never survives across matrices because every
  matrix starts a fresh stream.
* matrices are filled column by column.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient
from .linalg import frobenius_norm, qr_orthonormal

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO53 = float(1 << 53)

MAX_SPECTRUM_ATTEMPTS = 3


def _check_seed(seed: int) -> int:
    if not isinstance(seed, int) or not 0 <= seed < (1 << 64):
        raise ValueError(f"seed must be an integer in [0, 2^64), got {seed!r}")
    return seed


class SplitMix64:
    """The pinned 64-bit stream described in the module docstring."""

    def __init__(self, seed: int):
        self._state = _check_seed(seed)
        self._spare = None

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) / _TWO53

    def next_normal(self) -> float:
        """Standard normal via Box-Muller with spare caching."""
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = ((self.next_u64() >> 11) + 1) / _TWO53
        u2 = (self.next_u64() >> 11) / _TWO53
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)

    def normal_matrix(self, rows: int, cols: int) -> np.ndarray:
        """rows x cols standard normals, filled column by column."""
        vals = np.empty(rows * cols)
        for i in range(rows * cols):
            vals[i] = self.next_normal()
        return vals.reshape((rows, cols), order="F")


@dataclass(frozen=True)
class SpectrumSpec:
    """A target spectrum: n x p (taller or square) with p prescribed
    singular values in descending order."""

    n: int
    p: int
    singular_values: tuple
    seed: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and isinstance(self.p, int)):
            raise ValueError("dims must be integers")
        if not self.n >= self.p >= 1:
            raise ValueError(f"need n >= p >= 1, got n={self.n}, p={self.p}")
        sv = tuple(float(v) for v in self.singular_values)
        object.__setattr__(self, "singular_values", sv)
        if len(sv) != self.p:
            raise ValueError(f"expected {self.p} singular values, got {len(sv)}")
        if not all(math.isfinite(v) and v >= 0.0 for v in sv):
            raise ValueError("singular values must be finite and nonnegative")
        if any(sv[i] < sv[i + 1] for i in range(len(sv) - 1)):
            raise ValueError("singular values must be in descending order")
        if self.p >= 2 and sv[0] > 0.0 and sv[0] == sv[1]:
            raise ValueError("leading pair must be strictly separated")
        _check_seed(self.seed)

    @property
    def leading_gap(self) -> float:
        """Relative separation (s1 - s2) / s1; inf for p == 1, 0 for an
        all-zero spectrum."""
        if self.p == 1:
            return math.inf
        s = self.singular_values
        if s[0] == 0.0:
            return 0.0
        return (s[0] - s[1]) / s[0]


def matrix_with_spectrum(spec: SpectrumSpec) -> np.ndarray:
    """Dense n x p matrix with exactly the prescribed singular values.

    Both orthonormal factors come from qr_orthonormal applied to seeded
    normal matrices: the stream first yields the n*p entries of the left
    factor, then the p*p entries of the right one.  A rank-deficient draw
    (essentially impossible) retries with seed+1, at most
    MAX_SPECTRUM_ATTEMPTS times.
    """
    for attempt in range(MAX_SPECTRUM_ATTEMPTS):
        gen = SplitMix64((spec.seed + attempt) & _MASK64)
        gl = gen.normal_matrix(spec.n, spec.p)
        gr = gen.normal_matrix(spec.p, spec.p)
        try:
            ql = qr_orthonormal(gl)
            qright = qr_orthonormal(gr)
        except RankDeficient:
            continue
        return ql @ np.diag(np.array(spec.singular_values)) @ qright.T
    raise RankDeficient(
        f"no full-rank normal draw in {MAX_SPECTRUM_ATTEMPTS} attempts"
    )


def perturbation_direction(n: int, p: int, seed: int) -> np.ndarray:
    """Seeded n x p direction with unit Frobenius norm."""
    if n < 1 or p < 1:
        raise ValueError(f"need positive dims, got n={n}, p={p}")
    gen = SplitMix64(_check_seed(seed))
    m = gen.normal_matrix(n, p)
    norm = frobenius_norm(m)
    if norm == 0.0:
        raise ArithmeticError("normal draw collapsed to the zero matrix")
    return m / norm
