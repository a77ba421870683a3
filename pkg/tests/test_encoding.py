import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdprivacy.encoding import (
    DimensionMask,
    QuantScheme,
    Scheme,
    encode_level,
    encode_scalar,
    map_features,
    obfuscate_query,
    quantize,
    theoretical_thresholds,
)
from hdprivacy.errors import DimensionError, InputError
from hdprivacy.hdcore import Codebook


def naive_level_encoding(idx, cb):
    """Per-dimension loop oracle for the level encoding."""
    out = np.zeros(cb.d_hv, dtype=np.int64)
    for j in range(cb.d_hv):
        out[j] = sum(int(cb.level_table[idx[k], j]) * int(cb.base[k, j]) for k in range(cb.d_iv))
    return out


class TestMapFeatures:
    def test_boundaries(self):
        assert map_features([0.0, 1.0], (0.0, 1.0), 4).tolist() == [0, 3]

    def test_nearest_bin(self):
        # bin centres 0, 1/3, 2/3, 1
        assert map_features([0.49], (0.0, 1.0), 4).tolist() == [1]
        assert map_features([0.51], (0.0, 1.0), 4).tolist() == [2]

    def test_degenerate_range_warns(self):
        with pytest.warns(RuntimeWarning):
            out = map_features([3.0, 3.0], (3.0, 3.0), 5)
        assert out.tolist() == [0, 0]


class TestEncodeScalar:
    cb = Codebook(5, 3, 64)

    def test_zero_features(self):
        assert not encode_scalar(np.zeros(3, dtype=int), self.cb).any()

    def test_single_feature(self):
        cb = Codebook(5, 1, 64)
        np.testing.assert_array_equal(encode_scalar(np.array([3]), cb), 3 * cb.base[0])

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            encode_scalar(np.ones(4, dtype=int), self.cb)

    def test_variance_matches_feature_count(self):
        cb = Codebook(9, 200, 10_000)
        v = np.random.default_rng(1).choice([-1, 1], size=200)
        h = encode_scalar(v, cb)
        assert 180 <= h.var() <= 220

    @given(st.lists(st.integers(-20, 20), min_size=3, max_size=3),
           st.lists(st.integers(-20, 20), min_size=3, max_size=3),
           st.integers(-4, 4), st.integers(-4, 4))
    @settings(max_examples=50, deadline=None)
    def test_linear(self, v, w, a, b):
        v, w = np.array(v), np.array(w)
        lhs = encode_scalar(a * v + b * w, self.cb)
        rhs = a * encode_scalar(v, self.cb) + b * encode_scalar(w, self.cb)
        np.testing.assert_array_equal(lhs, rhs)


class TestEncodeLevel:
    def test_single_feature_is_binding(self):
        cb = Codebook(2, 1, 32, 4)
        np.testing.assert_array_equal(encode_level(np.array([2]), cb),
                                      cb.level_table[2] * cb.base[0])

    def test_two_feature_parity(self):
        cb = Codebook(2, 2, 200, 4)
        h = encode_level(np.array([1, 3]), cb)
        p0 = cb.level_table[1] * cb.base[0]
        p1 = cb.level_table[3] * cb.base[1]
        np.testing.assert_array_equal(h[p0 == p1], 2 * p0[p0 == p1])
        assert not h[p0 != p1].any()

    def test_matches_naive_loop(self):
        cb = Codebook(8, 7, 50, 5)
        idx = np.random.default_rng(3).integers(0, 5, size=(4, 7))
        batch = encode_level(idx, cb)
        for row, h in zip(idx, batch):
            np.testing.assert_array_equal(h, naive_level_encoding(row, cb))

    def test_range_and_parity(self):
        cb = Codebook(8, 13, 2000, 6)
        idx = np.random.default_rng(4).integers(0, 6, size=(20, 13))
        h = encode_level(idx, cb)
        assert np.abs(h).max() <= 13
        assert np.all(h % 2 == 13 % 2)

    def test_out_of_range_level(self):
        cb = Codebook(8, 2, 20, 3)
        with pytest.raises(InputError):
            encode_level(np.array([0, 3]), cb)

    def test_norm_matches_closed_form(self):
        cb = Codebook(17, 617, 10_000, 10)
        idx = np.random.default_rng(5).integers(0, 10, size=(200, 617))
        norms = np.linalg.norm(encode_level(idx, cb).astype(float), axis=1)
        assert norms.mean() == pytest.approx(2484, rel=0.02)


class TestQuantize:
    def test_binary_tie_rule(self):
        assert quantize(np.array([5, -3, 0]), "binary").tolist() == [1, -1, 1]

    def test_none_is_identity(self):
        h = np.array([4, -7, 0])
        assert quantize(h, "none") is h

    def test_biased_ternary_zero_rate(self):
        cb = Codebook(12, 617, 10_000)
        v = np.random.default_rng(6).choice([-1, 1], size=617)
        q = quantize(encode_scalar(v, cb), "ternary_biased", 617)
        assert 0.47 <= np.mean(q == 0) <= 0.53

    @pytest.mark.parametrize("scheme", list(QuantScheme(s).scheme for s in Scheme if s is not Scheme.NONE))
    def test_alphabet(self, scheme):
        h = np.random.default_rng(7).normal(0, 20, size=1000).round().astype(int)
        q = quantize(h, QuantScheme(scheme), 400)
        assert set(np.unique(q)) <= set(QuantScheme(scheme).alphabet)

    @pytest.mark.parametrize("scheme", ["binary", "ternary", "ternary_biased"])
    def test_idempotent(self, scheme):
        h = np.random.default_rng(8).normal(0, 20, size=1000).round().astype(int)
        once = quantize(h, scheme, 400)
        np.testing.assert_array_equal(quantize(once, scheme, 400), once)

    @pytest.mark.parametrize("scheme", ["ternary", "ternary_biased", "two_bit"])
    def test_theoretical_frequencies_converge(self, scheme):
        # continuous features with sum(v**2) == d_iv, so each dim is ~N(0, d_iv)
        d_iv = 400
        cb = Codebook(13, d_iv, 100_000)
        v = np.random.default_rng(9).normal(size=d_iv)
        v *= math.sqrt(d_iv) / np.linalg.norm(v)
        q = quantize(encode_scalar(v, cb), scheme, d_iv)
        target = QuantScheme.parse(scheme).probabilities
        for sym, p in target.items():
            assert np.mean(q == sym) == pytest.approx(p, abs=0.01)

    def test_thresholds_values(self):
        lo, hi = theoretical_thresholds(Scheme.TERNARY, 100)
        assert hi == pytest.approx(0.4307 * 10, abs=1e-3)
        lo, hi = theoretical_thresholds(Scheme.TERNARY_BIASED, 100)
        assert hi == pytest.approx(0.6745 * 10, abs=1e-3)

    def test_empirical_ternary_tertiles(self):
        h = np.arange(-150, 150)
        q = quantize(h, "ternary:empirical")
        assert [np.sum(q == s) for s in (-1, 0, 1)] == [100, 100, 100]

    def test_empirical_batch_rows_independent(self):
        h = np.stack([np.arange(-150, 150), 10 * np.arange(-150, 150)])
        q = quantize(h, "ternary_biased:empirical")
        np.testing.assert_array_equal(q[0], q[1])

    def test_parse_roundtrip(self):
        for text in ("binary", "two_bit", "ternary:empirical"):
            assert str(QuantScheme.parse(text)) == text


class TestMaskAndObfuscation:
    def test_full_mask_none_identity(self):
        h = np.array([3, -1, 0, 9])
        np.testing.assert_array_equal(obfuscate_query(h, "none", DimensionMask.full(4)), h)

    def test_empty_mask(self):
        h = np.array([3, -1, 0, 9])
        assert not obfuscate_query(h, "binary", DimensionMask(np.zeros(4, bool))).any()

    @pytest.mark.parametrize("d_hv", [1000, 1001])
    def test_binary_half_mask(self, d_hv):
        cb = Codebook(14, 20, d_hv, 4)
        h = encode_level(np.random.default_rng(10).integers(0, 4, size=20), cb)
        mask = DimensionMask.from_fraction(d_hv, 0.5, seed=3)
        q = obfuscate_query(h, "binary", mask)
        assert np.sum(q == 0) == math.ceil(d_hv / 2)
        assert set(np.unique(q[q != 0])) <= {-1, 1}

    def test_quantize_before_mask(self):
        h = np.array([5, -5, 5, -5])
        mask = DimensionMask(np.array([True, False, True, True]))
        assert obfuscate_query(h, "binary", mask).tolist() == [1, 0, 1, -1]

    def test_mask_idempotent(self):
        mask = DimensionMask.random(50, 20, 1)
        h = np.arange(50)
        np.testing.assert_array_equal(mask.apply(mask.apply(h)), mask.apply(h))
        assert mask.count_kept == 30

    @given(st.lists(st.booleans(), min_size=1, max_size=60))
    def test_rle_roundtrip(self, bits):
        mask = DimensionMask(np.array(bits))
        assert DimensionMask.from_rle(mask.to_rle(), len(bits)) == mask
