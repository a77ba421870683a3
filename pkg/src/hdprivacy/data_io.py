"""Datasets, synthetic data, splits and the on-disk/wire formats.

CSV layout: one sample per row, ``d_iv`` numeric columns followed by an
integer label. An optional first line
``# privehd-csv v1 d_iv=<n> classes=<m> min=<x> max=<y>`` pins the shape and
feature range.

Obfuscated query record (little-endian)::

    8s   magic  b"HDQUERY\\0"
    B    version (1)
    I    d_hv
    B    scheme tag (index into SCHEME_TAGS)
    I    number of mask runs, then that many I run lengths (first run kept)
    i    one int32 per kept dimension, in dimension order
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, replace

import numpy as np

from .encoding import DimensionMask, Scheme
from .errors import ConfigError, InputError, ParseError
from .hdcore import make_rng

HEADER_PREFIX = "# privehd-csv v1"
QUERY_MAGIC = b"HDQUERY\x00"
QUERY_VERSION = 1
SCHEME_TAGS = (Scheme.NONE, Scheme.BINARY, Scheme.TERNARY, Scheme.TERNARY_BIASED, Scheme.TWO_BIT)


@dataclass(frozen=True)
class Dataset:
    samples: np.ndarray
    labels: np.ndarray
    num_classes: int
    feature_range: tuple[float, float]
    name: str = "dataset"
    split_seed: int | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if samples.ndim != 2 or samples.shape[0] != labels.shape[0]:
            raise InputError("samples must be 2-D with one label per row")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise InputError("label outside [0, num_classes)")
        lo, hi = (float(x) for x in self.feature_range)
        if samples.size and (samples.min() < lo or samples.max() > hi):
            raise InputError("feature range does not cover the samples")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_range", (lo, hi))

    def __len__(self):
        return self.labels.shape[0]

    @property
    def d_iv(self) -> int:
        return self.samples.shape[1]

    def subset(self, index, name=None) -> "Dataset":
        return replace(self, samples=self.samples[index], labels=self.labels[index],
                       name=name or self.name)


@dataclass(frozen=True)
class SyntheticSpec:
    num_classes: int = 4
    d_iv: int = 64
    samples_per_class: int = 100
    cluster_std: float = 0.08
    seed: int = 0

    def __post_init__(self):
        if min(self.num_classes, self.d_iv, self.samples_per_class) < 1 or self.cluster_std < 0:
            raise ConfigError(f"invalid synthetic spec {self}")


def gen_synthetic(spec: SyntheticSpec) -> Dataset:
    """Gaussian clusters in the unit cube, clipped to ``[0, 1]``.

    Rows are grouped by class; :func:`split` shuffles.
    """
    rng = make_rng(spec.seed, 10)
    means = rng.uniform(0.0, 1.0, size=(spec.num_classes, spec.d_iv))
    noise = rng.normal(0.0, 1.0, size=(spec.num_classes, spec.samples_per_class, spec.d_iv))
    samples = np.clip(means[:, None, :] + spec.cluster_std * noise, 0.0, 1.0)
    labels = np.repeat(np.arange(spec.num_classes), spec.samples_per_class)
    name = (f"synthetic-c{spec.num_classes}-d{spec.d_iv}-n{spec.samples_per_class}"
            f"-s{spec.cluster_std}-seed{spec.seed}")
    return Dataset(samples.reshape(-1, spec.d_iv), labels, spec.num_classes, (0.0, 1.0), name)


def gen_images(num_classes: int, side: int, samples_per_class: int, seed: int,
               stroke_fraction: float = 0.2) -> Dataset:
    """Image-like data: 8-bit greyscale ``side x side`` glyphs, mostly black.

    Each class has a random prototype of bright pixels; samples flip a few
    pixels and add mild intensity jitter.
    """
    rng = make_rng(seed, 11)
    d = side * side
    protos = rng.random((num_classes, d)) < stroke_fraction
    rows, labels = [], []
    for c in range(num_classes):
        flips = rng.random((samples_per_class, d)) < 0.05
        on = protos[c] ^ flips
        val = np.where(on, rng.integers(180, 256, size=on.shape), rng.integers(0, 20, size=on.shape))
        rows.append(val)
        labels.append(np.full(samples_per_class, c))
    return Dataset(np.concatenate(rows).astype(np.float64), np.concatenate(labels),
                   num_classes, (0.0, 255.0), f"images-{side}x{side}-seed{seed}")


def split(dataset: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Stratified seeded split; each class keeps ``round(n * fraction)`` rows
    (at least one on each side)."""
    if not 0 < train_fraction < 1:
        raise ConfigError(f"train fraction must be in (0, 1), got {train_fraction}")
    rng = make_rng(seed, 12)
    train_idx, test_idx = [], []
    for c in range(dataset.num_classes):
        rows = np.flatnonzero(dataset.labels == c)
        if rows.size == 0:
            continue
        if rows.size < 2:
            raise InputError(f"class {c} has fewer than 2 samples; cannot stratify")
        rows = rows[rng.permutation(rows.size)]
        k = min(max(int(math.floor(rows.size * train_fraction + 0.5)), 1), rows.size - 1)
        train_idx.append(rows[:k])
        test_idx.append(rows[k:])
    tr = np.concatenate(train_idx)
    te = np.concatenate(test_idx)
    tr = tr[rng.permutation(tr.size)]
    te = np.sort(te)
    return (replace(dataset.subset(tr, dataset.name + "/train"), split_seed=seed),
            replace(dataset.subset(te, dataset.name + "/test"), split_seed=seed))


def _header(dataset: Dataset) -> str:
    lo, hi = dataset.feature_range
    return (f"{HEADER_PREFIX} d_iv={dataset.d_iv} classes={dataset.num_classes} "
            f"min={lo!r} max={hi!r}")


def write_csv(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(_header(dataset) + "\n")
        for row, label in zip(dataset.samples.tolist(), dataset.labels.tolist()):
            fh.write(",".join(repr(v) for v in row) + f",{label}\n")


def _parse_header(line: str, lineno: int) -> dict:
    out = {}
    for tok in line[len(HEADER_PREFIX):].split():
        key, sep, value = tok.partition("=")
        if not sep:
            raise ParseError(f"bad header token {tok!r}", lineno)
        try:
            out[key] = int(value) if key in ("d_iv", "classes") else float(value)
        except ValueError:
            raise ParseError(f"bad header value {tok!r}", lineno) from None
    return out


def load_csv(path, name: str | None = None) -> Dataset:
    """Parse a dataset CSV, inferring the feature range unless the header
    gives one. Row order is preserved."""
    header: dict = {}
    rows, labels = [], []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if lineno == 1 and line.startswith(HEADER_PREFIX):
                    header = _parse_header(line, lineno)
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
                if width < 2:
                    raise ParseError("need at least one feature column before the label", lineno)
            elif len(cells) != width:
                raise ParseError(f"ragged row: {len(cells)} cells, expected {width}", lineno)
            try:
                rows.append([float(c) for c in cells[:-1]])
            except ValueError:
                raise ParseError("non-numeric feature cell", lineno) from None
            try:
                label = float(cells[-1])
            except ValueError:
                raise ParseError("non-numeric label cell", lineno) from None
            if label != int(label) or label < 0:
                raise ParseError(f"label must be a non-negative integer, got {cells[-1]!r}", lineno)
            labels.append(int(label))
    if not rows:
        raise ParseError("no samples in file")
    samples = np.array(rows, dtype=np.float64)
    labels = np.array(labels, dtype=np.int64)
    if "d_iv" in header and header["d_iv"] != samples.shape[1]:
        raise ParseError(f"header says d_iv={header['d_iv']}, rows have {samples.shape[1]}", 1)
    num_classes = int(header.get("classes", labels.max() + 1))
    if labels.max() >= num_classes:
        raise ParseError(f"label {labels.max()} exceeds header classes={num_classes}", 1)
    lo = header.get("min", float(samples.min()))
    hi = header.get("max", float(samples.max()))
    try:
        return Dataset(samples, labels, num_classes, (lo, hi), name or str(path))
    except InputError as exc:
        raise ParseError(str(exc)) from None


# -- obfuscated query wire format ---------------------------------------------

def encode_query(h, scheme, mask: DimensionMask) -> bytes:
    h = np.asarray(h)
    if h.ndim != 1 or h.size != mask.d_hv:
        raise InputError("query length must equal the mask length")
    if h.dtype.kind not in "iub":
        raise InputError("only integer queries can be serialized")
    if np.any(h[~mask.kept] != 0):
        raise InputError("masked dimensions must be zero")
    kept = h[mask.kept].astype(np.int64)
    if kept.size and (kept.min() < -2**31 or kept.max() >= 2**31):
        raise InputError("query value does not fit int32")
    scheme = Scheme(getattr(scheme, "scheme", scheme))
    runs = mask.to_rle()
    parts = [
        QUERY_MAGIC,
        struct.pack("<BIBI", QUERY_VERSION, mask.d_hv, SCHEME_TAGS.index(scheme), len(runs)),
        struct.pack(f"<{len(runs)}I", *runs),
        kept.astype("<i4").tobytes(),
    ]
    return b"".join(parts)


def decode_query(blob: bytes) -> tuple[np.ndarray, Scheme, DimensionMask]:
    if blob[:8] != QUERY_MAGIC:
        raise ParseError("bad query magic")
    try:
        version, d_hv, tag, n_runs = struct.unpack_from("<BIBI", blob, 8)
        if version != QUERY_VERSION:
            raise ParseError(f"unsupported query version {version}")
        off = 8 + struct.calcsize("<BIBI")
        runs = struct.unpack_from(f"<{n_runs}I", blob, off)
        off += 4 * n_runs
        mask = DimensionMask.from_rle(runs, d_hv)
        scheme = SCHEME_TAGS[tag]
    except (struct.error, IndexError) as exc:
        raise ParseError(f"truncated or corrupt query record: {exc}") from None
    body = blob[off:]
    if len(body) != 4 * mask.count_kept:
        raise ParseError(f"expected {mask.count_kept} dims, got {len(body)} bytes")
    h = np.zeros(d_hv, dtype=np.int64)
    h[mask.kept] = np.frombuffer(body, dtype="<i4")
    return h, scheme, mask
