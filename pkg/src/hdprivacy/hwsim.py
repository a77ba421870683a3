"""Bit-exact model of the approximate FPGA encoder datapath.

Bits follow the hardware convention: ``True`` stands for +1 and ``False``
for -1. A binary-quantized dimension is the majority of the ``d_iv`` XNOR
bits that form it. The approximate circuit takes 6-input majorities in the
first stage (one LUT-6 each) and sums those majority bits exactly in the
following stages.

Groups that are not full are padded with alternating constants starting
from a per-column seeded bit. Majority ties use predetermined seeded bits
per LUT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DimensionError, InputError
from .hdcore import Codebook, make_rng

TIE_STREAM = 5
GROUP = 6


def majority6(bits, tie: bool) -> bool:
    bits = list(bits)
    if len(bits) != GROUP:
        raise InputError(f"majority6 takes exactly 6 bits, got {len(bits)}")
    ones = sum(bool(b) for b in bits)
    if ones == 3:
        return bool(tie)
    return ones > 3


def n_groups(d_iv: int) -> int:
    return -(-d_iv // GROUP)


@dataclass(frozen=True)
class TieBreakTable:
    """Predetermined tie and padding bits for a ``n_columns x d_iv`` circuit.

    ``group_ties[j, g]`` resolves a 3-3 tie in LUT ``g`` of column ``j``;
    ``final_ties[j]`` resolves a tie of the second-stage comparison;
    ``pad_start[j]`` is the first padding constant of column ``j``.
    """

    seed: int
    n_columns: int
    d_iv: int
    group_ties: np.ndarray = field(init=False, repr=False)
    final_ties: np.ndarray = field(init=False, repr=False)
    pad_start: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.d_iv < 1 or self.n_columns < 1:
            raise InputError("tie table needs positive shape")
        rng = make_rng(self.seed, TIE_STREAM)
        g = n_groups(self.d_iv)
        for name, shape in (("group_ties", (self.n_columns, g)),
                            ("final_ties", (self.n_columns,)),
                            ("pad_start", (self.n_columns,))):
            arr = rng.integers(0, 2, size=shape).astype(bool)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def padding(self, column: int) -> np.ndarray:
        n_pad = n_groups(self.d_iv) * GROUP - self.d_iv
        start = bool(self.pad_start[column])
        return np.array([start ^ bool(i % 2) for i in range(n_pad)], dtype=bool)


def _padded(bits: np.ndarray, ties: TieBreakTable) -> np.ndarray:
    """Append each column's padding; ``bits`` is ``(n_columns, d_iv)``."""
    n_pad = n_groups(ties.d_iv) * GROUP - ties.d_iv
    if n_pad == 0:
        return bits
    alternate = (np.arange(n_pad) % 2).astype(bool)
    pad = ties.pad_start[:, None] ^ alternate[None, :]
    return np.concatenate([bits, pad], axis=1)


def approx_sign_bits(bits, ties: TieBreakTable) -> np.ndarray:
    """Approximate majority of every row of a ``(n_columns, d_iv)`` bit matrix."""
    bits = np.asarray(bits, dtype=bool)
    if bits.shape != (ties.n_columns, ties.d_iv):
        raise DimensionError(f"bits shape {bits.shape} does not match tie table "
                             f"({ties.n_columns}, {ties.d_iv})")
    g = n_groups(ties.d_iv)
    ones = _padded(bits, ties).reshape(ties.n_columns, g, GROUP).sum(axis=2)
    majority = np.where(ones == 3, ties.group_ties, ones > 3)
    total = 2 * majority.sum(axis=1, dtype=np.int64)
    return np.where(total == g, ties.final_ties, total > g)


def approx_sign_accumulate(column, ties: TieBreakTable, column_index: int = 0) -> bool:
    """Approximate majority of one column using the table row ``column_index``."""
    column = np.asarray(column, dtype=bool).reshape(-1)
    if column.size != ties.d_iv:
        raise DimensionError(f"column has {column.size} bits, table expects {ties.d_iv}")
    g = n_groups(ties.d_iv)
    padded = np.concatenate([column, ties.padding(column_index)])
    majority = [majority6(padded[i * GROUP:(i + 1) * GROUP], ties.group_ties[column_index, i])
                for i in range(g)]
    s = sum(majority)
    if 2 * s == g:
        return bool(ties.final_ties[column_index])
    return 2 * s > g


def exact_sign_bits(bits) -> np.ndarray:
    """Exact majority with the ``sign(0) = +1`` rule."""
    bits = np.asarray(bits, dtype=bool)
    return 2 * bits.sum(axis=-1, dtype=np.int64) >= bits.shape[-1]


def xnor_bits(indices, codebook: Codebook) -> np.ndarray:
    """``(d_hv, d_iv)`` matrix of the bound bits of one level-encoded input."""
    idx = np.asarray(indices)
    if idx.shape != (codebook.d_iv,):
        raise DimensionError(f"expected {codebook.d_iv} level indices")
    if idx.min() < 0 or idx.max() >= codebook.levels:
        raise InputError("level index out of range")
    return (codebook.level_table[idx] == codebook.base).T


def hw_encode_binary(indices, codebook: Codebook, ties: TieBreakTable) -> np.ndarray:
    """Binary-quantized level encoding as produced by the approximate circuit."""
    if ties.n_columns != codebook.d_hv or ties.d_iv != codebook.d_iv:
        raise DimensionError("tie table shape must be (d_hv, d_iv) of the codebook")
    idx = np.asarray(indices)
    if idx.ndim == 2:
        return np.stack([hw_encode_binary(row, codebook, ties) for row in idx])
    out = approx_sign_bits(xnor_bits(idx, codebook), ties)
    return np.where(out, 1, -1).astype(np.int64)


# -- ternary -------------------------------------------------------------------

def ternary_first_stage(symbols) -> np.ndarray:
    """Exact sums of consecutive symbol triplets (zero-padded), each in [-3, 3]."""
    s = np.asarray(symbols, dtype=np.int64).reshape(-1)
    if s.size == 0 or np.any(np.abs(s) > 1):
        raise InputError("ternary symbols must be in {-1, 0, +1}")
    s = np.concatenate([s, np.zeros((-s.size) % 3, dtype=np.int64)])
    return s.reshape(-1, 3).sum(axis=1)


def saturating_ternary_tree(values) -> tuple[int, int]:
    """Sum 3-bit values through a tree that keeps every node 3 bits wide.

    Each node adds its children, drops the least-significant bit (floor
    division by two) and clamps to ``[-4, 3]``. Leaves are zero-padded to a
    power of two. Returns ``(root, scale)`` with ``scale = 2 ** depth`` so that
    ``root * scale`` estimates the exact sum.
    """
    v = np.asarray(values, dtype=np.int64).reshape(-1)
    if v.size == 0:
        raise InputError("empty adder tree")
    if np.any((v < -3) | (v > 3)):
        raise ContractError("ternary tree inputs must lie in [-3, 3]")
    depth = math.ceil(math.log2(v.size)) if v.size > 1 else 0
    v = np.concatenate([v, np.zeros(2 ** depth - v.size, dtype=np.int64)])
    while v.size > 1:
        v = np.clip((v[0::2] + v[1::2]) // 2, -4, 3)
    return int(v[0]), 2 ** depth


def ternary_tree_estimate(symbols) -> int:
    root, scale = saturating_ternary_tree(ternary_first_stage(symbols))
    return root * scale


# -- cost model ------------------------------------------------------------------

@dataclass(frozen=True)
class LutCostReport:
    mode: str
    d_iv: int
    n_lut_approx: float
    n_lut_exact: float
    savings_percent: float

    def to_record(self) -> dict:
        return {"mode": self.mode, "d_iv": self.d_iv, "n_lut_approx": self.n_lut_approx,
                "n_lut_exact": self.n_lut_exact, "savings_percent": self.savings_percent}


def lut_cost(d_iv: int, mode: str) -> LutCostReport:
    """Closed-form LUT-6 counts: binary 7/18 vs 4/3 per input, ternary 2 vs 3."""
    if d_iv < GROUP:
        raise InputError(f"cost model needs d_iv >= {GROUP}")
    if mode == "binary":
        approx, exact = 7 * d_iv / 18, 4 * d_iv / 3
    elif mode == "ternary":
        approx, exact = 2.0 * d_iv, 3.0 * d_iv
    else:
        raise InputError(f"unknown mode {mode!r}")
    return LutCostReport(mode, d_iv, approx, exact, (exact - approx) / exact * 100)


# -- Monte-Carlo agreement ---------------------------------------------------------

def binary_agreement(d_iv: int, n_columns: int, seed: int, chunk: int = 10_000) -> float:
    """Fraction of uniformly random columns where the approximate circuit
    matches the exact majority."""
    rng = make_rng(seed, 6)
    ties = TieBreakTable(seed, n_columns, d_iv)
    bits = rng.integers(0, 2, size=(n_columns, d_iv), dtype=np.int8).astype(bool)
    agree = 0
    for start in range(0, n_columns, chunk):
        block = bits[start:start + chunk]
        sub = _TableSlice(ties, start, block.shape[0])
        agree += int(np.count_nonzero(approx_sign_bits(block, sub) == exact_sign_bits(block)))
    return agree / n_columns


class _TableSlice:
    """Row range of a tie table, duck-typed for :func:`approx_sign_bits`."""

    def __init__(self, table: TieBreakTable, start: int, n: int):
        self.d_iv = table.d_iv
        self.n_columns = n
        self.group_ties = table.group_ties[start:start + n]
        self.final_ties = table.final_ties[start:start + n]
        self.pad_start = table.pad_start[start:start + n]


def _tree_estimates(sym: np.ndarray) -> np.ndarray:
    """Row-wise :func:`ternary_tree_estimate` for a ``(n, d_iv)`` symbol matrix."""
    n, d = sym.shape
    sym = np.concatenate([sym, np.zeros((n, (-d) % 3), dtype=np.int64)], axis=1)
    v = sym.reshape(n, -1, 3).sum(axis=2)
    width = v.shape[1]
    depth = math.ceil(math.log2(width)) if width > 1 else 0
    v = np.concatenate([v, np.zeros((n, 2 ** depth - width), dtype=np.int64)], axis=1)
    while v.shape[1] > 1:
        v = np.clip((v[:, 0::2] + v[:, 1::2]) // 2, -4, 3)
    return v[:, 0] * 2 ** depth


def ternary_agreement(d_iv: int, n_trials: int, seed: int) -> float:
    """Fraction of random ternary columns whose tree estimate has the sign
    (``sign(0) = +1``) of the exact sum."""
    rng = make_rng(seed, 7)
    sym = rng.integers(-1, 2, size=(n_trials, d_iv))
    hits = (_tree_estimates(sym) >= 0) == (sym.sum(axis=1) >= 0)
    return float(np.mean(hits))
