"""HD classifier: bundling, similarity search, retraining and pruning."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .encoding import (
    DimensionMask,
    QuantScheme,
    encode_level,
    encode_scalar,
    map_features,
    quantize,
)
from .errors import ConfigError, ContractError, DimensionError, InputError, ParseError
from .hdcore import Codebook

VARIANTS = ("level", "scalar")
FORMAT_VERSION = 1


@dataclass(frozen=True)
class EncodingConfig:
    """Everything needed to turn raw features into (quantized) encodings.

    For the ``scalar`` variant each feature contributes its level index
    (``0 .. levels - 1``), which keeps the encodings integral.
    """

    seed: int
    d_iv: int
    d_hv: int
    levels: int = 10
    variant: str = "level"
    scheme: QuantScheme = field(default_factory=QuantScheme)
    feature_min: float = 0.0
    feature_max: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown encoding variant {self.variant!r}")
        if isinstance(self.scheme, str):
            object.__setattr__(self, "scheme", QuantScheme.parse(self.scheme))
        if self.d_iv < 1 or self.d_hv < 1:
            raise ConfigError("d_iv and d_hv must be positive")
        if self.levels < 2:
            raise ConfigError("need at least 2 levels")

    @cached_property
    def codebook(self) -> Codebook:
        return Codebook(self.seed, self.d_iv, self.d_hv, self.levels)

    @property
    def feature_range(self):
        return (self.feature_min, self.feature_max)

    def encode_raw(self, features) -> np.ndarray:
        """Full-precision encodings of raw feature rows."""
        idx = map_features(features, self.feature_range, self.levels)
        if self.variant == "level":
            return encode_level(idx, self.codebook)
        return encode_scalar(idx, self.codebook)

    def encode(self, features, scheme: QuantScheme | None = None) -> np.ndarray:
        scheme = self.scheme if scheme is None else scheme
        return quantize(self.encode_raw(features), scheme, self.d_iv)

    def with_scheme(self, scheme) -> "EncodingConfig":
        if isinstance(scheme, str):
            scheme = QuantScheme.parse(scheme)
        return replace(self, scheme=scheme)


@dataclass(frozen=True)
class PredictionResult:
    label: int
    scores: np.ndarray


@dataclass(eq=False)
class Model:
    """Integer class hypervectors with a shared dimension mask.

    ``class_norms`` is a cache; :meth:`refresh_norms` must follow any direct
    write to ``classes``. Degenerate classes (no training samples) and
    zero-norm classes score ``-inf``.
    """

    classes: np.ndarray
    config: EncodingConfig
    mask: DimensionMask
    train_counts: np.ndarray
    private: bool = False
    privacy: dict | None = None
    class_norms: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.classes = np.asarray(self.classes, dtype=np.int64)
        self.train_counts = np.asarray(self.train_counts, dtype=np.int64)
        if self.classes.ndim != 2 or self.classes.shape[0] < 2:
            raise ConfigError("a model needs at least two classes")
        if self.classes.shape[1] != self.config.d_hv or self.mask.d_hv != self.config.d_hv:
            raise DimensionError("class vectors, mask and config disagree on d_hv")
        if self.train_counts.shape != (self.classes.shape[0],):
            raise DimensionError("one train count per class required")
        self.refresh_norms()

    @property
    def num_classes(self) -> int:
        return self.classes.shape[0]

    @property
    def d_hv(self) -> int:
        return self.classes.shape[1]

    @property
    def degenerate(self) -> np.ndarray:
        return self.train_counts == 0

    def refresh_norms(self, rows=None):
        if rows is None:
            self.class_norms = np.sqrt(np.einsum("ij,ij->i", self.classes, self.classes).astype(np.float64))
        else:
            for r in np.atleast_1d(rows):
                c = self.classes[r]
                self.class_norms[r] = math.sqrt(int(np.dot(c, c)))

    def copy(self) -> "Model":
        return Model(self.classes.copy(), self.config, self.mask, self.train_counts.copy(),
                     self.private, None if self.privacy is None else dict(self.privacy))

    def scores(self, queries) -> np.ndarray:
        """Normalized dot products, one column per class."""
        q = np.asarray(queries)
        if q.shape[-1] != self.d_hv:
            raise DimensionError(f"query has {q.shape[-1]} dims, model has {self.d_hv}")
        if q.dtype.kind in "iub":
            raw = (q.astype(np.int64) @ self.classes.T).astype(np.float64)
        else:
            raw = q.astype(np.float64) @ self.classes.T.astype(np.float64)
        dead = self.degenerate | (self.class_norms == 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = raw / np.where(dead, 1.0, self.class_norms)
        out[..., dead] = -np.inf
        return out


def train(encoded, labels, num_classes: int, config: EncodingConfig) -> Model:
    """Bundle encodings into class hypervectors (order-independent)."""
    h = np.atleast_2d(np.asarray(encoded))
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if h.shape[0] != labels.shape[0]:
        raise DimensionError("one label per encoding required")
    if h.shape[1] != config.d_hv:
        raise DimensionError(f"encodings have {h.shape[1]} dims, config says {config.d_hv}")
    if h.dtype.kind not in "iub":
        raise InputError("class storage is integral; encode integer features or quantize")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise InputError(f"label outside [0, {num_classes})")
    classes = np.zeros((num_classes, config.d_hv), dtype=np.int64)
    np.add.at(classes, labels, h.astype(np.int64))
    counts = np.bincount(labels, minlength=num_classes)
    return Model(classes, config, DimensionMask.full(config.d_hv), counts)


def predict(model: Model, query) -> PredictionResult:
    query = np.asarray(query)
    if query.ndim != 1:
        raise DimensionError("predict takes one query; use predict_batch")
    scores = model.scores(query)
    return PredictionResult(int(np.argmax(scores)), scores)


def predict_batch(model: Model, queries) -> np.ndarray:
    # argmax returns the first maximum, i.e. ties go to the lowest class index
    return np.argmax(model.scores(np.atleast_2d(queries)), axis=1)


def accuracy(model: Model, queries, labels) -> float:
    labels = np.asarray(labels)
    if labels.size == 0:
        return float("nan")
    return float(np.mean(predict_batch(model, queries) == labels))


def retrain_epoch(model: Model, encoded, labels) -> tuple[Model, int]:
    """One online pass: each mispredicted sample moves from the predicted
    class to its true class, and later samples see the updated model."""
    if model.private:
        raise ContractError("a privately released model must not be retrained")
    if model.degenerate.any():
        raise ContractError("cannot retrain a model with empty classes")
    h = np.atleast_2d(np.asarray(encoded)).astype(np.int64)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if h.shape[0] != labels.shape[0]:
        raise DimensionError("one label per encoding required")
    out = model.copy()
    h = out.mask.apply(h)
    classes, norms = out.classes, out.class_norms
    wrong = 0
    for x, true in zip(h, labels):
        raw = (classes @ x).astype(np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(norms > 0, raw / np.where(norms > 0, norms, 1.0), -np.inf)
        guess = int(np.argmax(s))
        if guess != true:
            wrong += 1
            classes[true] += x
            classes[guess] -= x
            out.refresh_norms((true, guess))
    return out, wrong


def prune(model: Model, s_percent: float) -> tuple[Model, DimensionMask]:
    """Zero the ``ceil(s% * d_hv)`` dimensions with the smallest summed
    magnitude across classes; the mask is shared by every class."""
    if not 0 <= s_percent < 100:
        raise ConfigError(f"prune percentage must be in [0, 100), got {s_percent}")
    d = model.d_hv
    n_prune = math.ceil(round(s_percent * d / 100, 9))
    if n_prune >= d:
        raise ConfigError(f"pruning {s_percent}% removes all {d} dimensions")
    magnitude = np.abs(model.classes).sum(axis=0)
    order = np.argsort(magnitude, kind="stable")
    kept = np.ones(d, dtype=bool)
    kept[order[:n_prune]] = False
    mask = model.mask & DimensionMask(kept)
    out = model.copy()
    out.mask = mask
    out.classes = mask.apply(out.classes)
    out.refresh_norms()
    return out, mask


def effectual_curve(model: Model, query, class_index: int):
    """Share of ``query . class`` recovered as class dimensions are restored
    in ascending order of magnitude.

    Returns ``(dims_restored, fraction)`` arrays of length ``d_hv + 1``;
    the first point is 0.0 and the last is exactly 1.0.
    """
    if not 0 <= class_index < model.num_classes:
        raise InputError(f"no class {class_index}")
    c = model.classes[class_index]
    q = np.asarray(query).astype(np.int64)
    if q.shape != c.shape:
        raise DimensionError("query and class lengths differ")
    order = np.argsort(np.abs(c), kind="stable")
    partial = np.concatenate([[0], np.cumsum(q[order] * c[order])])
    full = int(partial[-1])
    if full == 0:
        raise InputError("query is orthogonal to the class; curve undefined")
    return np.arange(model.d_hv + 1), partial / full


# -- serialization -----------------------------------------------------------

_MAGIC = "hdmodel"


def _fmt_float(x: float) -> str:
    return repr(float(x))


def dumps(model: Model) -> str:
    """Versioned text form; :func:`loads` round-trips it bit-exactly."""
    cfg = model.config
    lines = [
        f"{_MAGIC} v{FORMAT_VERSION}",
        "encoding seed={} d_iv={} d_hv={} levels={} variant={} scheme={} threshold={} "
        "feature_min={} feature_max={}".format(
            cfg.seed, cfg.d_iv, cfg.d_hv, cfg.levels, cfg.variant, cfg.scheme.scheme.value,
            cfg.scheme.threshold, _fmt_float(cfg.feature_min), _fmt_float(cfg.feature_max)),
        f"num_classes {model.num_classes}",
        f"d_hv {model.d_hv}",
        f"private {int(model.private)}",
    ]
    if model.privacy is not None:
        lines.append("privacy " + " ".join(f"{k}={v!r}" for k, v in sorted(model.privacy.items())))
    lines.append("mask " + ",".join(str(r) for r in model.mask.to_rle()))
    lines.append("train_counts " + " ".join(str(int(c)) for c in model.train_counts))
    for i, row in enumerate(model.classes):
        lines.append(f"class {i} " + " ".join(map(str, row.tolist())))
    return "\n".join(lines) + "\n"


def _kv(tokens, lineno):
    out = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep:
            raise ParseError(f"expected key=value, got {tok!r}", lineno)
        out[key] = value
    return out


def loads(text: str) -> Model:
    lines = text.splitlines()
    if not lines or lines[0] != f"{_MAGIC} v{FORMAT_VERSION}":
        raise ParseError(f"not a v{FORMAT_VERSION} model file", 1)
    fields: dict = {}
    rows: dict[int, np.ndarray] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        key, _, rest = line.partition(" ")
        try:
            if key == "encoding":
                kv = _kv(rest.split(), lineno)
                fields["config"] = EncodingConfig(
                    seed=int(kv["seed"]), d_iv=int(kv["d_iv"]), d_hv=int(kv["d_hv"]),
                    levels=int(kv["levels"]), variant=kv["variant"],
                    scheme=QuantScheme(kv["scheme"], kv["threshold"]),
                    feature_min=float(kv["feature_min"]), feature_max=float(kv["feature_max"]))
            elif key in ("num_classes", "d_hv", "private"):
                fields[key] = int(rest)
            elif key == "privacy":
                kv = _kv(rest.split(), lineno)
                fields["privacy"] = {k: (int(v) if k == "noise_seed" else float(v)) for k, v in kv.items()}
            elif key == "mask":
                fields["mask"] = [int(r) for r in rest.split(",")]
            elif key == "train_counts":
                fields["train_counts"] = [int(c) for c in rest.split()]
            elif key == "class":
                idx, _, values = rest.partition(" ")
                rows[int(idx)] = np.array(values.split(), dtype=np.int64)
            elif line.strip():
                raise ParseError(f"unknown field {key!r}", lineno)
        except (KeyError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"bad {key} line: {exc}", lineno) from None
    missing = {"config", "num_classes", "d_hv", "private", "mask", "train_counts"} - fields.keys()
    if missing:
        raise ParseError(f"missing fields: {sorted(missing)}")
    n = fields["num_classes"]
    if sorted(rows) != list(range(n)):
        raise ParseError(f"expected class rows 0..{n - 1}")
    classes = np.stack([rows[i] for i in range(n)])
    mask = DimensionMask.from_rle(fields["mask"], fields["d_hv"])
    return Model(classes, fields["config"], mask, fields["train_counts"],
                 bool(fields["private"]), fields.get("privacy"))


def save(model: Model, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps(model))


def load(path) -> Model:
    with open(path, encoding="ascii") as fh:
        return loads(fh.read())
