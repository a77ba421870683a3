"""Codebook generation and the integer vector algebra.

Hypervectors are plain 1-D numpy arrays (int64 for encodings, int8 for
bipolar codebook rows). Codebook randomness comes from numpy's PCG64 bit
generator seeded through ``SeedSequence([seed, stream])``; PCG64 and
SeedSequence are versioned, platform-independent algorithms, so a
``(seed, d_iv, d_hv, levels)`` tuple regenerates the same codebook anywhere.

Stream ids: 0 = base vectors, 1 = level vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError, UndefinedSimilarityError

BASE_STREAM = 0
LEVEL_STREAM = 1


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Portable generator for ``(seed, stream)``."""
    if seed < 0:
        raise ConfigError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(stream)])))


def _bipolar(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.integers(0, 2, size=shape, dtype=np.int8) * 2 - 1).astype(np.int8)


def gen_base(seed: int, d_iv: int, d_hv: int) -> np.ndarray:
    """Return a ``(d_iv, d_hv)`` int8 matrix of i.i.d. uniform +-1 entries."""
    if d_iv < 1 or d_hv < 1:
        raise ConfigError(f"d_iv and d_hv must be >= 1, got d_iv={d_iv}, d_hv={d_hv}")
    return _bipolar(make_rng(seed, BASE_STREAM), (d_iv, d_hv))


def level_flip_count(levels: int, d_hv: int) -> int:
    return d_hv // (2 * levels)


def gen_levels(seed: int, levels: int, d_hv: int) -> np.ndarray:
    """Return a ``(levels, d_hv)`` int8 level table.

    Row 0 is random bipolar. Row ``k + 1`` flips ``d_hv // (2 * levels)``
    positions of row ``k``; positions are taken from one permutation, so no
    position is flipped twice and ``hamming(L[a], L[b]) == |a - b| * flips``.
    """
    if levels < 2:
        raise ConfigError(f"need at least 2 levels, got {levels}")
    if d_hv < 1:
        raise ConfigError(f"d_hv must be >= 1, got {d_hv}")
    rng = make_rng(seed, LEVEL_STREAM)
    table = np.empty((levels, d_hv), dtype=np.int8)
    table[0] = _bipolar(rng, d_hv)
    flips = level_flip_count(levels, d_hv)
    order = rng.permutation(d_hv)
    for k in range(1, levels):
        table[k] = table[k - 1]
        idx = order[(k - 1) * flips : k * flips]
        table[k, idx] *= -1
    return table


@dataclass(frozen=True)
class Codebook:
    """Base and level hypervectors shared by encoder and attacker.

    Only ``(seed, d_iv, d_hv, levels)`` is ever persisted; the matrices are
    regenerated on construction.
    """

    seed: int
    d_iv: int
    d_hv: int
    levels: int = 2
    base: np.ndarray = field(init=False, repr=False, compare=False)
    level_table: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        base = gen_base(self.seed, self.d_iv, self.d_hv)
        table = gen_levels(self.seed, self.levels, self.d_hv)
        base.flags.writeable = False
        table.flags.writeable = False
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "level_table", table)


def _check_pair(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def dot(a, b) -> int:
    """Exact integer dot product with int64 accumulation."""
    a, b = _check_pair(a, b)
    if a.dtype.kind not in "iub" or b.dtype.kind not in "iub":
        raise DimensionError("dot expects integer hypervectors; use np.dot for reals")
    a, b = a.astype(np.int64), b.astype(np.int64)
    if a.size and int(np.abs(a).max()) * int(np.abs(b).max()) * a.size >= 2**63:
        # int64 could overflow; fall back to Python integers
        return sum(int(x) * int(y) for x, y in zip(a.tolist(), b.tolist()))
    return int(np.dot(a, b))


def norm(a) -> float:
    a = np.asarray(a)
    if a.dtype.kind in "iub":
        return math.sqrt(dot(a, a))
    return float(np.linalg.norm(a))


def cosine(a, b) -> float:
    a, b = _check_pair(a, b)
    if a.dtype.kind in "iub" and b.dtype.kind in "iub":
        # one sqrt of the exact product keeps cosine(x, x) == 1.0
        aa, bb = dot(a, a), dot(b, b)
        if aa == 0 or bb == 0:
            raise UndefinedSimilarityError("cosine of a zero-norm hypervector is undefined")
        value = dot(a, b) / math.sqrt(aa * bb)
    else:
        af, bf = a.astype(np.float64), b.astype(np.float64)
        denom = math.sqrt(float(np.dot(af, af)) * float(np.dot(bf, bf)))
        if denom == 0.0:
            raise UndefinedSimilarityError("cosine of a zero-norm hypervector is undefined")
        value = float(np.dot(af, bf)) / denom
    return max(-1.0, min(1.0, value))


def hamming(a, b) -> int:
    a, b = _check_pair(a, b)
    return int(np.count_nonzero(a != b))
