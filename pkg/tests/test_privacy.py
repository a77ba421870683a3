import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq
from scipy.stats import halfnorm

from hdprivacy.encoding import SYMBOL_PROBABILITIES, DimensionMask, Scheme
from hdprivacy.errors import ConfigError, ContractError, InputError
from hdprivacy.hdcore import Codebook
from hdprivacy.model import EncodingConfig, Model, prune, retrain_epoch
from hdprivacy.privacy import (
    PipelineConfig,
    calibrate,
    dp_release,
    dp_train_pipeline,
    evaluate,
    monte_carlo_sensitivity,
    sensitivity_l1,
    sensitivity_l2,
    sensitivity_quantized,
    sensitivity_report,
)


def calibrate_oracle(eps, delta):
    """Root of 4/5 * exp(-(s * eps)**2 / 2) = delta, found numerically."""
    return brentq(lambda s: 0.8 * math.exp(-(s * eps) ** 2 / 2) - delta, 1e-9, 1e6)


class TestFormulas:
    def test_l1_identity(self):
        assert sensitivity_l1(math.pi / 2, 1) == pytest.approx(1.0, abs=1e-15)

    # 617 evaluates to 198,190.4; the 198,187 reference figure is an arithmetic slip
    @pytest.mark.parametrize("d_iv,expected", [(617, 198_190.4), (200, 112_838)])
    def test_l1_values(self, d_iv, expected):
        assert abs(sensitivity_l1(d_iv, 10_000) - expected) <= 1
        # oracle: mean of |N(0, d_iv)| per dimension
        assert sensitivity_l1(d_iv, 10_000) == pytest.approx(
            halfnorm(scale=math.sqrt(d_iv)).mean() * 10_000, rel=1e-12)

    def test_l2_values(self):
        assert sensitivity_l2(617, 10_000) == pytest.approx(2484, abs=0.5)
        assert sensitivity_l2(200, 10_000) == pytest.approx(1000 * math.sqrt(2), abs=1e-9)
        assert sensitivity_l2(1, 1) == 1.0

    @pytest.mark.parametrize("fn", [sensitivity_l1, sensitivity_l2])
    def test_nonpositive_args(self, fn):
        with pytest.raises(ConfigError):
            fn(0, 10)

    def test_quantized_binary(self):
        assert sensitivity_quantized(SYMBOL_PROBABILITIES[Scheme.BINARY], 10_000) == 100

    def test_quantized_ternary_ratio(self):
        biased = sensitivity_quantized(SYMBOL_PROBABILITIES[Scheme.TERNARY_BIASED], 777)
        uniform = sensitivity_quantized(SYMBOL_PROBABILITIES[Scheme.TERNARY], 777)
        assert biased / uniform == pytest.approx(math.sqrt(0.75), abs=1e-12)
        assert biased / uniform == pytest.approx(0.8660, abs=1e-4)

    def test_quantized_biased_at_1000_dims(self):
        assert sensitivity_quantized(SYMBOL_PROBABILITIES[Scheme.TERNARY_BIASED], 1000) == pytest.approx(22.36, abs=0.005)

    def test_point_mass_at_zero(self):
        assert sensitivity_quantized({0: 1.0}, 10_000) == 0.0

    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(InputError):
            sensitivity_quantized({-1: 0.5, 1: 0.49}, 100)

    def test_report_uses_kept_dims(self):
        cfg = EncodingConfig(0, 64, 2000, scheme="ternary_biased")
        assert sensitivity_report(cfg, 1000).l2 == pytest.approx(math.sqrt(500))

    def test_report_flags_scalar_as_approximate(self):
        assert sensitivity_report(EncodingConfig(0, 64, 2000, variant="scalar")).approximate
        assert not sensitivity_report(EncodingConfig(0, 64, 2000)).approximate

    @pytest.mark.parametrize("d_iv", [100, 200, 617])
    def test_monte_carlo_matches_formulas(self, d_iv):
        mc = monte_carlo_sensitivity(Codebook(4, d_iv, 10_000, 10), 200, seed=8)
        assert mc.l1 == pytest.approx(sensitivity_l1(d_iv, 10_000), rel=0.02)
        assert mc.l2 == pytest.approx(sensitivity_l2(d_iv, 10_000), rel=0.02)


class TestCalibrate:
    def test_reference_value(self):
        assert calibrate(1.0, 1e-5) == pytest.approx(4.752, abs=0.005)

    def test_halves_with_double_epsilon(self):
        assert calibrate(2.0, 1e-5) == pytest.approx(calibrate(1.0, 1e-5) / 2, rel=1e-15)
        assert calibrate(2.0, 1e-5) == pytest.approx(2.376, abs=0.001)

    @pytest.mark.parametrize("delta", [0.8, 0.9])
    def test_delta_boundary(self, delta):
        with pytest.raises(ConfigError):
            calibrate(1.0, delta)

    def test_nonpositive_epsilon(self):
        with pytest.raises(ConfigError):
            calibrate(0.0)

    def test_infinite_epsilon(self):
        assert calibrate(math.inf) == 0.0

    @given(st.floats(0.01, 20), st.floats(1e-12, 0.79))
    def test_matches_numeric_root(self, eps, delta):
        assert calibrate(eps, delta) == pytest.approx(calibrate_oracle(eps, delta), rel=1e-7)

    def test_strictly_decreasing(self):
        eps = np.linspace(0.05, 10, 20)
        sig = [calibrate(e) for e in eps]
        assert all(a > b for a, b in zip(sig, sig[1:]))
        deltas = np.logspace(-12, -0.2, 20)
        sig = [calibrate(1.0, d) for d in deltas]
        assert all(a > b for a, b in zip(sig, sig[1:]))


def _model(rows, mask=None):
    rows = np.asarray(rows)
    d = rows.shape[1]
    return Model(rows, EncodingConfig(0, 4, d), mask or DimensionMask.full(d), np.ones(len(rows), int))


class TestRelease:
    def test_sigma_zero(self):
        m = _model(np.arange(20).reshape(2, 10))
        out = dp_release(m, 50.0, 0.0, noise_seed=1)
        np.testing.assert_array_equal(out.classes, m.classes)
        assert out.private and not m.private

    def test_noise_std(self):
        m = _model(np.zeros((2, 10_000), int))
        out = dp_release(m, 25.0, 4.0, noise_seed=2)
        assert 97 <= out.classes[0].std() <= 103
        np.testing.assert_allclose(out.class_norms, np.linalg.norm(out.classes, axis=1))

    def test_masked_dims_stay_zero(self):
        rng = np.random.default_rng(0)
        m = _model(rng.integers(-50, 50, size=(3, 500)))
        m, mask = prune(m, 40)
        out = dp_release(m, 10.0, 3.0, noise_seed=4)
        assert not out.classes[:, ~mask.kept].any()
        assert out.classes[:, mask.kept].any()

    def test_double_release(self):
        out = dp_release(_model(np.ones((2, 8), int)), 1.0, 1.0, noise_seed=0)
        with pytest.raises(ContractError):
            dp_release(out, 1.0, 1.0, noise_seed=0)

    def test_no_retraining_after_release(self):
        out = dp_release(_model(np.ones((2, 8), int)), 1.0, 1.0, noise_seed=0)
        with pytest.raises(ContractError):
            retrain_epoch(out, np.ones((1, 8), int), [0])

    def test_reproducible(self):
        m = _model(np.ones((2, 300), int))
        a = dp_release(m, 7.0, 2.0, noise_seed=9)
        b = dp_release(m, 7.0, 2.0, noise_seed=9)
        c = dp_release(m, 7.0, 2.0, noise_seed=10)
        np.testing.assert_array_equal(a.classes, b.classes)
        assert not np.array_equal(a.classes, c.classes)

    def test_records_parameters(self):
        out = dp_release(_model(np.ones((2, 8), int)), 3.0, 2.0, noise_seed=5, epsilon=1.0, delta=1e-5)
        assert out.privacy == {"epsilon": 1.0, "delta": 1e-5, "sigma": 2.0, "delta_f": 3.0, "noise_seed": 5}


class TestPipeline:
    def test_infinite_epsilon_is_non_private(self, clusters):
        train_ds, test_ds = clusters
        res = dp_train_pipeline(train_ds, PipelineConfig(d_hv=2000, epsilon=math.inf))
        assert res.params is None and not res.model.private
        assert res.model is res.clean_model
        assert evaluate(res, test_ds) > 0.95

    def test_private_provenance(self, clusters):
        train_ds, _ = clusters
        cfg = PipelineConfig(d_hv=2000, scheme="ternary_biased", prune_percent=50, epochs=1,
                             epsilon=1.0, noise_seed=3)
        res = dp_train_pipeline(train_ds, cfg)
        assert res.model.private
        assert res.sensitivity.l2 == pytest.approx(math.sqrt(0.5 * 1000))
        assert res.params.sigma == pytest.approx(calibrate(1.0))
        assert res.model.mask.count_kept == 1000
        assert len(res.mispredictions) == 1

    def test_smaller_epsilon_hurts_on_average(self, clusters):
        train_ds, test_ds = clusters
        acc = {}
        for eps in (1.0, 0.1):
            acc[eps] = np.mean([evaluate(dp_train_pipeline(
                train_ds, PipelineConfig(d_hv=2000, epsilon=eps, noise_seed=s)), test_ds) for s in range(5)])
        assert acc[1.0] > acc[0.1]
