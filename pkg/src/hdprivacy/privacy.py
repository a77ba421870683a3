"""Sensitivity of HD training, Gaussian-noise calibration and private release."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .encoding import QuantScheme, Scheme, encode_level
from .errors import ConfigError, ContractError, InputError
from .hdcore import Codebook, make_rng
from .model import EncodingConfig, Model, accuracy, prune, retrain_epoch, train

NOISE_STREAM = 3
DEFAULT_DELTA = 1e-5


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float
    delta: float
    sigma: float
    delta_f: float
    noise_seed: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SensitivityReport:
    l1: float
    l2: float
    source: str
    config: dict = field(default_factory=dict)
    approximate: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def sensitivity_l1(d_iv: float, d_hv: float) -> float:
    """Expected l1 norm of a full-precision level encoding, sqrt(2 d_iv / pi) * d_hv."""
    if d_iv <= 0 or d_hv <= 0:
        raise ConfigError("d_iv and d_hv must be positive")
    return math.sqrt(2 * d_iv / math.pi) * d_hv


def sensitivity_l2(d_iv: float, d_hv: float) -> float:
    """Expected l2 norm of a full-precision level encoding, sqrt(d_hv * d_iv)."""
    if d_iv <= 0 or d_hv <= 0:
        raise ConfigError("d_iv and d_hv must be positive")
    return math.sqrt(d_hv * d_iv)


def sensitivity_quantized(probabilities: dict, d_hv: float) -> float:
    """l2 norm of a quantized encoding whose symbol ``k`` occurs with
    probability ``probabilities[k]``: sqrt(sum_k p_k * d_hv * k**2)."""
    total = math.fsum(probabilities.values())
    if abs(total - 1.0) > 1e-9:
        raise InputError(f"symbol probabilities sum to {total}, not 1")
    if any(p < 0 for p in probabilities.values()):
        raise InputError("negative symbol probability")
    return math.sqrt(math.fsum(p * d_hv * k * k for k, p in probabilities.items()))


def sensitivity_quantized_l1(probabilities: dict, d_hv: float) -> float:
    return math.fsum(p * d_hv * abs(k) for k, p in probabilities.items())


def sensitivity_report(config: EncodingConfig, kept_dims: int | None = None) -> SensitivityReport:
    """Formula sensitivities for a model trained with ``config``, counting
    only ``kept_dims`` unpruned dimensions."""
    d = config.d_hv if kept_dims is None else kept_dims
    echo = {"d_iv": config.d_iv, "d_hv": config.d_hv, "kept_dims": d,
            "variant": config.variant, "scheme": str(config.scheme)}
    probs = config.scheme.probabilities
    if probs is None:
        # level-index features make scalar-encoding variance sum(v**2), not d_iv
        return SensitivityReport(sensitivity_l1(config.d_iv, d), sensitivity_l2(config.d_iv, d),
                                 "formula", echo, approximate=config.variant == "scalar")
    return SensitivityReport(sensitivity_quantized_l1(probs, d), sensitivity_quantized(probs, d),
                             "formula", echo)


def monte_carlo_sensitivity(codebook: Codebook, n_samples: int, seed: int) -> SensitivityReport:
    """Mean l1 and l2 norms of level encodings of uniformly random inputs."""
    rng = make_rng(seed, 4)
    idx = rng.integers(0, codebook.levels, size=(n_samples, codebook.d_iv))
    h = encode_level(idx, codebook)
    l1 = float(np.abs(h).sum(axis=1).mean())
    l2 = float(np.sqrt((h.astype(np.float64) ** 2).sum(axis=1)).mean())
    echo = {"d_iv": codebook.d_iv, "d_hv": codebook.d_hv, "n_samples": n_samples, "seed": seed}
    return SensitivityReport(l1, l2, "monte_carlo", echo)


def calibrate(epsilon: float, delta: float = DEFAULT_DELTA) -> float:
    """Smallest noise multiplier with delta >= 4/5 * exp(-(sigma * epsilon)**2 / 2)."""
    if not epsilon > 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    if not 0 < delta < 0.8:
        raise ConfigError(f"delta must lie in (0, 0.8) for this bound, got {delta}")
    if math.isinf(epsilon):
        return 0.0
    return math.sqrt(2 * math.log(4 / (5 * delta))) / epsilon


def dp_release(model: Model, delta_f: float, sigma: float, noise_seed: int,
               epsilon: float = math.nan, delta: float = math.nan) -> Model:
    """Add rounded N(0, (delta_f * sigma)**2) noise to every kept dimension.

    The noise matrix is always drawn for all classes and dimensions from
    ``noise_seed``, so the result depends only on the seed and the model.
    """
    if model.private:
        raise ContractError("model was already released")
    if delta_f < 0 or sigma < 0:
        raise ConfigError("delta_f and sigma must be non-negative")
    rng = make_rng(noise_seed, NOISE_STREAM)
    noise = rng.normal(0.0, delta_f * sigma, size=model.classes.shape)
    out = model.copy()
    noisy = np.rint(out.classes + noise).astype(np.int64)
    out.classes = out.mask.apply(noisy)
    out.refresh_norms()
    out.private = True
    out.privacy = PrivacyParams(float(epsilon), float(delta), float(sigma), float(delta_f),
                                int(noise_seed)).to_dict()
    return out


@dataclass(frozen=True)
class PipelineConfig:
    d_hv: int = 4000
    levels: int = 10
    variant: str = "level"
    scheme: QuantScheme = field(default_factory=lambda: QuantScheme(Scheme.TERNARY))
    prune_percent: float = 0.0
    epochs: int = 0
    epsilon: float = 1.0
    delta: float = DEFAULT_DELTA
    codebook_seed: int = 0
    noise_seed: int = 0

    def __post_init__(self):
        if isinstance(self.scheme, str):
            object.__setattr__(self, "scheme", QuantScheme.parse(self.scheme))


@dataclass
class PipelineResult:
    model: Model
    params: PrivacyParams | None
    sensitivity: SensitivityReport
    clean_model: Model
    mispredictions: list[int]


def encoding_config_for(dataset, cfg: PipelineConfig) -> EncodingConfig:
    lo, hi = dataset.feature_range
    return EncodingConfig(cfg.codebook_seed, dataset.d_iv, cfg.d_hv, cfg.levels, cfg.variant,
                          cfg.scheme, lo, hi)


def train_private(encoded, labels, num_classes: int, enc: EncodingConfig,
                  cfg: PipelineConfig) -> PipelineResult:
    """train -> prune -> retrain -> sensitivity -> calibrate -> release, on
    encodings that are already quantized with ``enc.scheme``."""
    model = train(encoded, labels, num_classes, enc)
    if cfg.prune_percent:
        model, _ = prune(model, cfg.prune_percent)
    wrong = []
    for _ in range(cfg.epochs):
        model, n = retrain_epoch(model, encoded, labels)
        wrong.append(n)
    report = sensitivity_report(enc, model.mask.count_kept)
    if math.isinf(cfg.epsilon):
        return PipelineResult(model, None, report, model, wrong)
    sigma = calibrate(cfg.epsilon, cfg.delta)
    released = dp_release(model, report.l2, sigma, cfg.noise_seed, cfg.epsilon, cfg.delta)
    params = PrivacyParams(cfg.epsilon, cfg.delta, sigma, report.l2, cfg.noise_seed)
    return PipelineResult(released, params, report, model, wrong)


def dp_train_pipeline(dataset, cfg: PipelineConfig) -> PipelineResult:
    """Encode with quantization, then run :func:`train_private`.

    ``cfg.epsilon = inf`` skips the noise and returns the non-private model.
    """
    enc = encoding_config_for(dataset, cfg)
    encoded = enc.encode(dataset.samples)
    return train_private(encoded, dataset.labels, dataset.num_classes, enc, cfg)


def evaluate(result: PipelineResult, test) -> float:
    enc = result.model.config
    return accuracy(result.model, enc.encode(test.samples), test.labels)
