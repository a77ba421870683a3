"""Feature-to-hypervector encoding, encoding quantization and query obfuscation.

Every function accepts a single vector or a 2-D batch with one row per
input.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import norm as _normal

from .errors import ConfigError, DimensionError, InputError
from .hdcore import Codebook, make_rng


class Scheme(str, Enum):
    NONE = "none"
    BINARY = "binary"
    TERNARY = "ternary"
    TERNARY_BIASED = "ternary_biased"
    TWO_BIT = "two_bit"


ALPHABETS = {
    Scheme.BINARY: (-1, 1),
    Scheme.TERNARY: (-1, 0, 1),
    Scheme.TERNARY_BIASED: (-1, 0, 1),
    Scheme.TWO_BIT: (-2, -1, 0, 1),
}

# target symbol probabilities that the thresholds below are tuned for
SYMBOL_PROBABILITIES = {
    Scheme.BINARY: {-1: 0.5, 1: 0.5},
    Scheme.TERNARY: {-1: 1 / 3, 0: 1 / 3, 1: 1 / 3},
    Scheme.TERNARY_BIASED: {-1: 0.25, 0: 0.5, 1: 0.25},
    Scheme.TWO_BIT: {-2: 0.25, -1: 0.25, 0: 0.25, 1: 0.25},
}

THRESHOLD_SOURCES = ("theoretical", "empirical")


@dataclass(frozen=True)
class QuantScheme:
    """A quantization scheme plus where its thresholds come from.

    ``theoretical`` thresholds assume each encoded dimension is N(0, d_iv);
    ``empirical`` thresholds are quantiles of the vector being quantized.
    """

    scheme: Scheme = Scheme.NONE
    threshold: str = "theoretical"

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.threshold not in THRESHOLD_SOURCES:
            raise ConfigError(f"unknown threshold source {self.threshold!r}")

    @classmethod
    def parse(cls, text: str) -> "QuantScheme":
        """Parse ``"ternary_biased"`` or ``"ternary_biased:empirical"``."""
        name, _, source = text.partition(":")
        try:
            return cls(Scheme(name), source or "theoretical")
        except ValueError as exc:
            raise ConfigError(f"bad quantization scheme {text!r}: {exc}") from None

    def __str__(self):
        if self.threshold == "theoretical":
            return self.scheme.value
        return f"{self.scheme.value}:{self.threshold}"

    @property
    def alphabet(self):
        return ALPHABETS.get(self.scheme)

    @property
    def probabilities(self):
        return SYMBOL_PROBABILITIES.get(self.scheme)


def map_features(values, feature_range, levels: int) -> np.ndarray:
    """Map raw features onto level indices in ``[0, levels)``.

    The range is split into ``levels`` evenly spaced bin centres, ``min`` and
    ``max`` included, and each value goes to its nearest centre (halves round
    up). A degenerate range maps everything to level 0 and warns.
    """
    if levels < 2:
        raise ConfigError(f"need at least 2 levels, got {levels}")
    lo, hi = (float(x) for x in feature_range)
    values = np.asarray(values, dtype=np.float64)
    if not hi > lo:
        warnings.warn(f"degenerate feature range ({lo}, {hi}); all features map to level 0",
                      RuntimeWarning, stacklevel=2)
        return np.zeros(values.shape, dtype=np.int64)
    pos = (values - lo) / (hi - lo) * (levels - 1)
    idx = np.floor(pos + 0.5).astype(np.int64)
    return np.clip(idx, 0, levels - 1)


def level_values(indices, feature_range, levels: int) -> np.ndarray:
    """Inverse of :func:`map_features`: the bin centre of each level index."""
    lo, hi = (float(x) for x in feature_range)
    return lo + np.asarray(indices, dtype=np.float64) * (hi - lo) / (levels - 1)


def encode_scalar(values, codebook: Codebook) -> np.ndarray:
    """Weight each base vector by its feature and sum.

    Integer features give an exact int64 result; real features give float64.
    """
    v = np.asarray(values)
    if v.shape[-1] != codebook.d_iv or v.ndim not in (1, 2):
        raise DimensionError(f"expected {codebook.d_iv} features, got shape {v.shape}")
    out = v.astype(np.float64) @ codebook.base.astype(np.float64)
    if v.dtype.kind in "iub":
        # integer products summed in float64 are exact below 2**53
        return np.rint(out).astype(np.int64)
    return out


_CHUNK = 256


def encode_level(indices, codebook: Codebook) -> np.ndarray:
    """Bind each feature's level vector to its base vector and sum.

    Every output dimension is a sum of ``d_iv`` +-1 terms, so it lies in
    ``[-d_iv, d_iv]`` and shares the parity of ``d_iv``.
    """
    idx = np.asarray(indices)
    single = idx.ndim == 1
    idx = np.atleast_2d(idx)
    if idx.ndim != 2 or idx.shape[1] != codebook.d_iv:
        raise DimensionError(f"expected {codebook.d_iv} level indices, got shape {np.shape(indices)}")
    if idx.dtype.kind not in "iu":
        raise InputError("level indices must be integers")
    if idx.size and (idx.min() < 0 or idx.max() >= codebook.levels):
        raise InputError(f"level index outside [0, {codebook.levels})")
    base, table = codebook.base, codebook.level_table
    out = np.zeros((idx.shape[0], codebook.d_hv), dtype=np.int64)
    for start in range(0, idx.shape[0], _CHUNK):
        rows = idx[start : start + _CHUNK]
        acc = np.zeros((rows.shape[0], codebook.d_hv), dtype=np.int32)
        for k in range(codebook.d_iv):
            acc += table[rows[:, k]] * base[k]
        out[start : start + _CHUNK] = acc
    return out[0] if single else out


def theoretical_thresholds(scheme: Scheme, d_iv: int, scale: float | None = None):
    """Cut points for N(0, d_iv) (or N(0, scale**2) when ``scale`` is given)."""
    sigma = math.sqrt(d_iv) if scale is None else float(scale)
    if scheme is Scheme.TERNARY:
        t = _normal.ppf(2 / 3) * sigma
        return (-t, t)
    if scheme is Scheme.TERNARY_BIASED:
        t = _normal.ppf(0.75) * sigma
        return (-t, t)
    if scheme is Scheme.TWO_BIT:
        t = _normal.ppf(0.75) * sigma
        return (-t, 0.0, t)
    return ()


def _empirical_thresholds(scheme: Scheme, row: np.ndarray):
    if scheme is Scheme.TERNARY:
        return tuple(np.quantile(row, [1 / 3, 2 / 3]))
    if scheme is Scheme.TERNARY_BIASED:
        return tuple(np.quantile(row, [0.25, 0.75]))
    return tuple(np.quantile(row, [0.25, 0.5, 0.75]))


def _apply_thresholds(scheme: Scheme, h: np.ndarray, cuts) -> np.ndarray:
    if scheme is Scheme.TWO_BIT:
        lo, mid, hi = cuts
        out = np.full(h.shape, 1, dtype=np.int64)
        out[h < hi] = 0
        out[h < mid] = -1
        out[h < lo] = -2
        return out
    lo, hi = cuts
    out = np.zeros(h.shape, dtype=np.int64)
    out[h > hi] = 1
    out[h < lo] = -1
    return out


def quantize(h, scheme, d_iv: int | None = None) -> np.ndarray:
    """Quantize un-quantized encodings into the scheme's alphabet.

    ``binary`` is ``sign`` with ``sign(0) = +1``. Input already inside the
    target alphabet is returned unchanged, which makes the operation
    idempotent.
    """
    if not isinstance(scheme, QuantScheme):
        scheme = QuantScheme.parse(str(scheme.value if isinstance(scheme, Scheme) else scheme))
    h = np.asarray(h)
    kind = scheme.scheme
    if kind is Scheme.NONE:
        return h
    if np.isin(h, ALPHABETS[kind]).all():
        return h.astype(np.int64)
    if kind is Scheme.BINARY:
        return np.where(h >= 0, 1, -1).astype(np.int64)
    if scheme.threshold == "theoretical":
        if d_iv is None:
            raise ConfigError("theoretical thresholds need d_iv")
        return _apply_thresholds(kind, h, theoretical_thresholds(kind, d_iv))
    if h.ndim == 1:
        return _apply_thresholds(kind, h, _empirical_thresholds(kind, h))
    return np.stack([_apply_thresholds(kind, row, _empirical_thresholds(kind, row)) for row in h])


@dataclass(frozen=True)
class DimensionMask:
    """Boolean keep-mask over hypervector dimensions (``True`` = kept)."""

    kept: np.ndarray

    def __post_init__(self):
        kept = np.array(self.kept, dtype=bool)
        if kept.ndim != 1:
            raise DimensionError("mask must be one-dimensional")
        kept.flags.writeable = False
        object.__setattr__(self, "kept", kept)

    @classmethod
    def full(cls, d_hv: int) -> "DimensionMask":
        return cls(np.ones(d_hv, dtype=bool))

    @classmethod
    def random(cls, d_hv: int, n_masked: int, seed: int) -> "DimensionMask":
        """Mask ``n_masked`` dimensions chosen uniformly from a seeded stream."""
        if not 0 <= n_masked <= d_hv:
            raise ConfigError(f"cannot mask {n_masked} of {d_hv} dimensions")
        kept = np.ones(d_hv, dtype=bool)
        kept[make_rng(seed, 2).permutation(d_hv)[:n_masked]] = False
        return cls(kept)

    @classmethod
    def from_fraction(cls, d_hv: int, fraction: float, seed: int) -> "DimensionMask":
        return cls.random(d_hv, math.ceil(round(fraction * d_hv, 9)), seed)

    @classmethod
    def from_rle(cls, runs, d_hv: int | None = None) -> "DimensionMask":
        """Rebuild from alternating run lengths, the first run being kept."""
        parts, value = [], True
        for run in runs:
            if run < 0:
                raise InputError("negative run length")
            parts.append(np.full(int(run), value, dtype=bool))
            value = not value
        kept = np.concatenate(parts) if parts else np.zeros(0, dtype=bool)
        if d_hv is not None and kept.size != d_hv:
            raise DimensionError(f"mask runs cover {kept.size} dims, expected {d_hv}")
        return cls(kept)

    def to_rle(self) -> list[int]:
        runs, value, count = [], True, 0
        for bit in self.kept.tolist():
            if bit == value:
                count += 1
            else:
                runs.append(count)
                value, count = bit, 1
        runs.append(count)
        return runs

    @property
    def d_hv(self) -> int:
        return int(self.kept.size)

    @property
    def count_kept(self) -> int:
        return int(np.count_nonzero(self.kept))

    def apply(self, h) -> np.ndarray:
        h = np.asarray(h)
        if h.shape[-1] != self.kept.size:
            raise DimensionError(f"mask has {self.kept.size} dims, vector has {h.shape[-1]}")
        return np.where(self.kept, h, 0).astype(h.dtype)

    def __and__(self, other: "DimensionMask") -> "DimensionMask":
        return DimensionMask(self.kept & other.kept)

    def __eq__(self, other):
        return isinstance(other, DimensionMask) and np.array_equal(self.kept, other.kept)

    def __hash__(self):
        return hash(self.kept.tobytes())


def obfuscate_query(h, scheme, mask: DimensionMask, d_iv: int | None = None) -> np.ndarray:
    """Quantize, then zero every masked dimension."""
    return mask.apply(quantize(h, scheme, d_iv))
