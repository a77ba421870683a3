"""Linear inversion of HD encodings and reconstruction fidelity metrics.

The attacker is assumed to know the codebook (it is derived from a seed that
ships with the model). Quantization discards the magnitude of an encoding,
so decoded quantized queries are rescaled before scoring; see
:func:`rescale`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .encoding import DimensionMask, QuantScheme, Scheme, level_values
from .errors import DimensionError, InputError
from .hdcore import Codebook
from .model import Model

RESCALE_MODES = ("auto", "none", "range", "oracle")


def _check_query(h, codebook: Codebook) -> np.ndarray:
    h = np.asarray(h)
    if h.shape[-1] != codebook.d_hv:
        raise DimensionError(f"hypervector has {h.shape[-1]} dims, codebook has {codebook.d_hv}")
    return h


def decode_scalar(h, codebook: Codebook) -> np.ndarray:
    """Estimate each feature as ``h . B_m / d_hv``.

    Exact for a single feature; otherwise each estimate carries cross-talk
    with standard deviation about ``sqrt(sum_{k != m} v_k**2 / d_hv)``.
    """
    h = _check_query(h, codebook)
    return (h.astype(np.float64) @ codebook.base.T.astype(np.float64)) / codebook.d_hv


def crosstalk_std(features, d_hv: int) -> np.ndarray:
    """Predicted per-feature standard deviation of :func:`decode_scalar`."""
    v = np.asarray(features, dtype=np.float64)
    energy = np.sum(v * v)
    return np.sqrt((energy - v * v) / d_hv)


def decode_level(h, codebook: Codebook) -> np.ndarray:
    """Unbind each base vector from ``h`` and pick the most similar level.

    Ties (for example an all-zero ``h``) resolve to the lowest level index.
    """
    h = _check_query(h, codebook)
    if h.ndim != 1:
        return np.stack([decode_level(row, codebook) for row in h])
    unbound = codebook.base.astype(np.int64) * h.astype(np.int64)
    if h.dtype.kind in "iub":
        sims = unbound @ codebook.level_table.T.astype(np.int64)
    else:
        sims = unbound.astype(np.float64) @ codebook.level_table.T.astype(np.float64)
    return np.argmax(sims, axis=1)


@dataclass(frozen=True)
class Fidelity:
    mse: float
    psnr_db: float

    @property
    def perfect(self) -> bool:
        return math.isinf(self.psnr_db)


def fidelity(original, recovered, max_value: float) -> Fidelity:
    """Mean squared error and PSNR in dB; PSNR is ``inf`` when mse is 0."""
    a = np.asarray(original, dtype=np.float64)
    b = np.asarray(recovered, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return Fidelity(0.0, math.inf)
    return Fidelity(mse, 10.0 * math.log10(max_value ** 2 / mse))


def rescale(recovered, mode: str, feature_range=None, original=None) -> np.ndarray:
    """Undo the scale lost to quantization.

    ``range`` maps the recovered values affinely onto the known feature
    range (what an attacker holding the dataset metadata would do);
    ``oracle`` fits the affine map to the true features by least squares,
    an upper bound on any linear attacker.
    """
    u = np.asarray(recovered, dtype=np.float64)
    if mode == "none":
        return u
    if mode == "range":
        lo, hi = feature_range
        span = u.max() - u.min()
        if span == 0:
            return np.full(u.shape, (lo + hi) / 2)
        return lo + (u - u.min()) * (hi - lo) / span
    if mode == "oracle":
        if original is None:
            raise InputError("oracle rescaling needs the original features")
        design = np.stack([u, np.ones_like(u)], axis=1)
        coef, *_ = np.linalg.lstsq(design, np.asarray(original, dtype=np.float64), rcond=None)
        return design @ coef
    raise InputError(f"unknown rescale mode {mode!r}")


@dataclass(frozen=True)
class ReconstructionReport:
    recovered: np.ndarray
    mse: float
    psnr_db: float
    source: str
    variant: str
    scheme: str
    mask_kept: int
    d_hv: int
    rescale: str
    class_index: int | None = None
    extra: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "source": self.source, "variant": self.variant, "scheme": self.scheme,
            "mask_kept": self.mask_kept, "d_hv": self.d_hv, "rescale": self.rescale,
            "class_index": self.class_index, "mse": self.mse,
            "psnr_db": None if math.isinf(self.psnr_db) else self.psnr_db,
            "psnr_infinite": math.isinf(self.psnr_db), **self.extra,
        }


def _model_delta(model: Model, other: Model, class_index: int | None):
    if model.classes.shape != other.classes.shape:
        raise DimensionError("adjacent models must have the same shape")
    diff = model.classes - other.classes
    if class_index is None:
        changed = np.flatnonzero(np.any(diff != 0, axis=1))
        if changed.size != 1:
            raise InputError(f"models differ in {changed.size} classes; pass class_index")
        class_index = int(changed[0])
    if other.train_counts[class_index] > model.train_counts[class_index]:
        return -diff[class_index], class_index
    return diff[class_index], class_index


def breach_report(target, codebook: Codebook, original, *, other: Model | None = None,
                  class_index: int | None = None, variant: str = "scalar",
                  feature_range=None, max_value: float | None = None,
                  scheme="none", mask: DimensionMask | None = None,
                  rescale_mode: str = "auto") -> ReconstructionReport:
    """Reconstruct features from an offloaded query or from two adjacent models.

    ``target`` is either a query hypervector or a :class:`Model`; a model
    needs ``other``, and the class whose vectors differ is decoded (the
    difference is exactly the encoding of the extra training sample when no
    noise was added). ``variant='level'`` decodes level indices and maps
    them back to bin centres, which requires ``feature_range``.
    """
    original = np.asarray(original, dtype=np.float64)
    if isinstance(target, Model):
        if other is None:
            raise InputError("an adjacent-model breach needs both models")
        h, class_index = _model_delta(target, other, class_index)
        source = "adjacent"
    else:
        if other is not None:
            raise InputError("ambiguous input: a query was given together with a second model")
        h = np.asarray(target)
        if h.ndim != 1:
            raise InputError("query breach expects one hypervector")
        source = "query"
    h = _check_query(h, codebook)
    if original.shape != (codebook.d_iv,):
        raise DimensionError(f"original must have {codebook.d_iv} features")
    scheme = scheme if isinstance(scheme, QuantScheme) else QuantScheme.parse(str(getattr(scheme, "value", scheme)))
    if rescale_mode not in RESCALE_MODES:
        raise InputError(f"unknown rescale mode {rescale_mode!r}")
    if rescale_mode == "auto":
        rescale_mode = "none" if scheme.scheme is Scheme.NONE or variant == "level" else "range"
    if feature_range is None:
        feature_range = (float(original.min()), float(original.max()))
    if variant == "level":
        recovered = level_values(decode_level(h, codebook), feature_range, codebook.levels)
    elif variant == "scalar":
        recovered = decode_scalar(h, codebook)
    else:
        raise InputError(f"unknown variant {variant!r}")
    recovered = rescale(recovered, rescale_mode, feature_range, original)
    peak = max_value if max_value is not None else float(feature_range[1])
    fid = fidelity(original, recovered, peak)
    kept = mask.count_kept if mask is not None else codebook.d_hv
    return ReconstructionReport(recovered, fid.mse, fid.psnr_db, source, variant, str(scheme),
                                kept, codebook.d_hv, rescale_mode, class_index)


def write_pgm(path, values, width: int, height: int, max_value: int = 255) -> None:
    """Dump a flattened image as plain (P2) PGM, clipping to ``[0, max_value]``."""
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if v.size != width * height:
        raise DimensionError(f"{v.size} values cannot fill a {width}x{height} image")
    px = np.clip(np.rint(v), 0, max_value).astype(int).reshape(height, width)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"P2\n{width} {height}\n{max_value}\n")
        for row in px:
            fh.write(" ".join(map(str, row.tolist())) + "\n")
