import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdprivacy.errors import ConfigError, DimensionError, UndefinedSimilarityError
from hdprivacy.hdcore import Codebook, cosine, dot, gen_base, gen_levels, hamming


def test_gen_base_deterministic_single_row():
    a = gen_base(7, 1, 8)
    b = gen_base(7, 1, 8)
    assert a.shape == (1, 8)
    assert set(np.unique(a)) <= {-1, 1}
    np.testing.assert_array_equal(a, b)


def test_gen_base_seeds_differ():
    assert not np.array_equal(gen_base(7, 2, 10_000), gen_base(8, 2, 10_000))


@pytest.mark.parametrize("d_iv,d_hv", [(0, 8), (3, 0)])
def test_gen_base_rejects_empty_shapes(d_iv, d_hv):
    with pytest.raises(ConfigError):
        gen_base(1, d_iv, d_hv)


def test_base_rows_quasi_orthogonal():
    base = gen_base(7, 50, 10_000).astype(np.int64)
    gram = base @ base.T / 10_000
    off = np.abs(gram[~np.eye(50, dtype=bool)])
    # cosine std is 1/sqrt(d_hv) = 0.01
    assert off.max() < 0.05


def test_base_pair_statistics_over_many_seeds():
    cos = []
    for seed in range(1000):
        b = gen_base(seed, 2, 10_000)
        cos.append(cosine(b[0], b[1]))
    cos = np.abs(cos)
    assert cos.mean() < 0.01
    assert cos.max() < 0.05


def test_levels_small():
    table = gen_levels(3, 2, 8)
    assert hamming(table[0], table[1]) == 2


def test_levels_accumulate_disjoint_flips():
    table = gen_levels(3, 10, 10_000)
    assert hamming(table[0], table[9]) == 4500
    for a, b in itertools.combinations(range(10), 2):
        assert hamming(table[a], table[b]) == 500 * (b - a)


def test_level_cosine_matches_hamming_identity():
    table = gen_levels(3, 10, 10_000)
    assert cosine(table[0], table[1]) == pytest.approx(0.9, abs=1e-12)
    for k in range(9):
        h = hamming(table[0], table[k])
        assert cosine(table[0], table[k]) == pytest.approx(1 - 2 * h / 10_000, abs=1e-12)


def test_levels_need_two():
    with pytest.raises(ConfigError):
        gen_levels(1, 1, 100)


def test_codebook_regenerates_bit_identically():
    a, b = Codebook(11, 5, 300, 4), Codebook(11, 5, 300, 4)
    np.testing.assert_array_equal(a.base, b.base)
    np.testing.assert_array_equal(a.level_table, b.level_table)
    assert not a.base.flags.writeable


def test_dot_examples():
    x = gen_base(1, 1, 8)[0]
    assert dot(x, x) == 8
    assert dot(x, -x) == -8


def test_dot_random_pair_bound():
    b = gen_base(21, 2, 10_000)
    assert abs(dot(b[0], b[1])) < 500


def test_dot_length_mismatch():
    with pytest.raises(DimensionError):
        dot(np.ones(3, dtype=int), np.ones(4, dtype=int))


def test_dot_no_overflow_large_accumulation():
    # values at the scale of 2**20 bundled encodings of 617 features
    a = np.full(10_000, 617 * 2**20, dtype=np.int64)
    b = np.full(10_000, 617 * 2**20, dtype=np.int64)
    assert dot(a, b) == 10_000 * (617 * 2**20) ** 2


def test_cosine_examples():
    x = gen_base(1, 1, 8)[0].astype(np.int64)
    assert cosine(x, x) == 1.0
    assert cosine(x, -x) == -1.0
    assert cosine(3 * x, x) == 1.0


def test_cosine_zero_vector():
    with pytest.raises(UndefinedSimilarityError):
        cosine(np.zeros(4, dtype=int), np.ones(4, dtype=int))


vectors = st.lists(st.integers(-50, 50), min_size=1, max_size=40)


@given(vectors, st.integers(-5, 5), st.data())
@settings(max_examples=100, deadline=None)
def test_dot_symmetric_and_bilinear(a, k, data):
    b = data.draw(st.lists(st.integers(-50, 50), min_size=len(a), max_size=len(a)))
    a, b = np.array(a), np.array(b)
    assert dot(a, b) == dot(b, a)
    assert dot(k * a, b) == k * dot(a, b)
    # oracle: plain Python sum
    assert dot(a, b) == sum(int(x) * int(y) for x, y in zip(a, b))


def test_dot_independent_of_chunking():
    rng = np.random.default_rng(0)
    a = rng.integers(-1000, 1000, size=10_001)
    b = rng.integers(-1000, 1000, size=10_001)
    chunked = sum(dot(a[i:i + 997], b[i:i + 997]) for i in range(0, a.size, 997))
    assert chunked == dot(a, b)
