"""Command-line experiment driver.

Every subcommand writes JSON-lines records (one measurement per line,
sorted keys, no timestamps) to ``--output`` or stdout. Each record embeds the
fully resolved run configuration, including derived seeds, so a rerun with
the same flags reproduces the output byte for byte.

Seeds: any of ``--codebook-seed``, ``--noise-seed``, ``--split-seed``,
``--ties-seed``, ``--data-seed`` and ``--mask-seed`` left unset is derived
from ``--master-seed`` as the first 32-bit word of
``numpy.random.SeedSequence([master_seed, crc32(name)])`` where ``name`` is
the flag name without the ``-seed`` suffix (e.g. ``"noise"``).

Exit codes: 0 ok, 1 usage, 2 I/O or parse error, 3 configuration error,
4 contract violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import zlib
from contextlib import contextmanager

import numpy as np

from . import data_io, hwsim
from . import model as hdmodel
from .data_io import SyntheticSpec, gen_images, gen_synthetic, load_csv, split, write_csv
from .encoding import DimensionMask, QuantScheme, encode_scalar, map_features, obfuscate_query
from .errors import ConfigError, HDError
from .model import EncodingConfig, accuracy, prune, retrain_epoch, train
from .privacy import (
    PipelineConfig,
    calibrate,
    dp_release,
    sensitivity_l2,
    sensitivity_report,
    train_private,
)
from .reconstruction import breach_report, write_pgm

EXIT_USAGE, EXIT_IO, EXIT_CONFIG, EXIT_CONTRACT = 1, 2, 3, 4
SEED_NAMES = ("codebook", "noise", "split", "ties", "data", "mask")


def derive_seed(master: int, name: str) -> int:
    ss = np.random.SeedSequence([int(master), zlib.crc32(name.encode("ascii"))])
    return int(ss.generate_state(1, np.uint32)[0])


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in str(text).split(",") if x.strip()]


def _schemes(text):
    return [str(QuantScheme.parse(x.strip())) for x in str(text).split(",") if x.strip()]


def _common(p):
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", help="file of 'key = value' lines using the flag names")
    g.add_argument("--output", help="JSON-lines output (default: stdout)")
    g.add_argument("--master-seed", type=int, default=0)
    for name in SEED_NAMES:
        g.add_argument(f"--{name}-seed", type=int, default=None)
    d = p.add_argument_group("data")
    d.add_argument("--data", help="dataset CSV; a synthetic dataset is generated when omitted")
    d.add_argument("--synthetic-kind", choices=("clusters", "images"), default="clusters")
    d.add_argument("--num-classes", type=int, default=4)
    d.add_argument("--d-iv", type=int, default=64)
    d.add_argument("--samples-per-class", type=int, default=100)
    d.add_argument("--cluster-std", type=float, default=0.08)
    d.add_argument("--train-fraction", type=float, default=0.7)
    e = p.add_argument_group("encoding and model")
    e.add_argument("--encoding", choices=hdmodel.VARIANTS, default="level")
    e.add_argument("--d-hv", type=_ints, default=[4000])
    e.add_argument("--levels", type=int, default=10)
    e.add_argument("--scheme", type=_schemes, default=None)
    e.add_argument("--prune-percent", type=_floats, default=[0.0])
    e.add_argument("--epochs", type=int, default=0)
    e.add_argument("--epsilon", type=_floats, default=[math.inf])
    e.add_argument("--delta", type=float, default=1e-5)
    e.add_argument("--mask-size", type=_ints, default=[0])
    e.add_argument("--model", help="model file to read or write")
    e.add_argument("--model-out", help="where to write an updated model (default: --model)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hdprivacy", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-data", help="write a synthetic dataset CSV")
    _common(p)
    p.add_argument("path")

    for name, text in (("train", "train a model and report test accuracy"),
                       ("predict", "evaluate a model file, optionally with obfuscated queries"),
                       ("retrain", "run retraining epochs on a model file"),
                       ("prune", "prune a model file, then optionally retrain"),
                       ("dp-train", "differentially private training over an epsilon x d_hv grid")):
        _common(sub.add_parser(name, help=text))

    p = sub.add_parser("attack", help="reconstruct inputs from queries or adjacent models")
    _common(p)
    p.add_argument("--target", choices=("query", "adjacent"), default="query")
    p.add_argument("--attack-samples", type=int, default=10)
    p.add_argument("--rescale", choices=("auto", "none", "range", "oracle"), default="auto")
    p.add_argument("--pgm-dir")

    p = sub.add_parser("hw-sim", help="LUT cost and approximate-adder agreement statistics")
    _common(p)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--end-to-end", action="store_true", help="also compare classifier accuracy")

    p = sub.add_parser("sweep", help="experiment grids as JSON-lines plus optional CSV")
    _common(p)
    p.add_argument("--kind", choices=("inference", "dp", "data-size", "prune"), default="inference")
    p.add_argument("--train-fractions", type=_floats, default=[0.25, 0.5, 0.7])
    p.add_argument("--noise-std", type=float, default=None,
                   help="data-size sweep: fixed delta_f * sigma (default: from --epsilon)")
    p.add_argument("--noise-seeds", type=int, default=1)
    p.add_argument("--attack-samples", type=int, default=5)
    p.add_argument("--csv", help="CSV projection of the records")
    return parser


# -- configuration ---------------------------------------------------------------

def read_config_file(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.config:
        values = read_config_file(ns.config)
        sub = parser._subparsers._group_actions[0].choices[ns.command]
        actions = {a.dest: a for a in sub._actions}
        unknown = set(values) - set(actions) - {"config"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key, value in values.items():
            if isinstance(actions[key], argparse._StoreTrueAction):
                values[key] = value.lower() in ("1", "true", "yes", "on")
        sub.set_defaults(**values)
        ns = parser.parse_args(argv)
    for name in SEED_NAMES:
        attr = f"{name}_seed"
        if getattr(ns, attr) is None:
            setattr(ns, attr, derive_seed(ns.master_seed, name))
    return ns


def _jsonable(x):
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return None
        return x
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def resolved_config(ns) -> dict:
    skip = {"config", "output", "csv", "path"}
    return _jsonable({k: v for k, v in sorted(vars(ns).items()) if k not in skip})


class Recorder:
    def __init__(self, ns, stream):
        self.config = resolved_config(ns)
        self.stream = stream
        self.records: list[dict] = []

    def emit(self, event: str, **fields):
        rec = _jsonable({"event": event, **fields})
        self.records.append(rec)
        self.stream.write(json.dumps({**rec, "config": self.config}, sort_keys=True) + "\n")
        self.stream.flush()


@contextmanager
def _open_output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _single(values, flag):
    if len(values) != 1:
        raise ConfigError(f"{flag} takes a single value for this subcommand")
    return values[0]


def load_dataset(ns) -> data_io.Dataset:
    if ns.data:
        return load_csv(ns.data)
    if ns.synthetic_kind == "images":
        side = math.isqrt(ns.d_iv)
        if side * side != ns.d_iv:
            raise ConfigError("--d-iv must be a perfect square for image data")
        return gen_images(ns.num_classes, side, ns.samples_per_class, ns.data_seed)
    return gen_synthetic(SyntheticSpec(ns.num_classes, ns.d_iv, ns.samples_per_class,
                                       ns.cluster_std, ns.data_seed))


def _splits(ns):
    ds = load_dataset(ns)
    return split(ds, ns.train_fraction, ns.split_seed)


def _enc_config(ns, dataset, d_hv, scheme) -> EncodingConfig:
    lo, hi = dataset.feature_range
    return EncodingConfig(ns.codebook_seed, dataset.d_iv, d_hv, ns.levels, ns.encoding,
                          scheme, lo, hi)


def _scheme(ns, default="none") -> str:
    return _single(ns.scheme, "--scheme") if ns.scheme else default


def _require_model(ns):
    if not ns.model:
        raise ConfigError("--model is required")
    return hdmodel.load(ns.model)


def _save(ns, m):
    path = ns.model_out or ns.model
    if path:
        hdmodel.save(m, path)


# -- subcommands -------------------------------------------------------------------

def cmd_gen_data(ns, rec: Recorder):
    ds = load_dataset(ns)
    write_csv(ds, ns.path)
    rec.emit("gen-data", name=ds.name, samples=len(ds), d_iv=ds.d_iv,
             num_classes=ds.num_classes, feature_range=list(ds.feature_range))


def cmd_train(ns, rec: Recorder):
    tr, te = _splits(ns)
    enc = _enc_config(ns, tr, _single(ns.d_hv, "--d-hv"), _scheme(ns))
    h = enc.encode(tr.samples)
    m = train(h, tr.labels, tr.num_classes, enc)
    s = _single(ns.prune_percent, "--prune-percent")
    if s:
        m, _ = prune(m, s)
    for _ in range(ns.epochs):
        m, _ = retrain_epoch(m, h, tr.labels)
    _save(ns, m)
    q = enc.encode(te.samples)
    rec.emit("train", train_accuracy=accuracy(m, h, tr.labels),
             test_accuracy=accuracy(m, q, te.labels), kept_dims=m.mask.count_kept,
             train_size=len(tr), test_size=len(te))


def cmd_predict(ns, rec: Recorder):
    m = _require_model(ns)
    _, te = _splits(ns)
    scheme = QuantScheme.parse(_scheme(ns, str(m.config.scheme)))
    n_mask = _single(ns.mask_size, "--mask-size")
    mask = DimensionMask.random(m.d_hv, n_mask, ns.mask_seed)
    q = obfuscate_query(m.config.encode_raw(te.samples), scheme, mask, m.config.d_iv)
    labels = hdmodel.predict_batch(m, q)
    rec.emit("predict", accuracy=float(np.mean(labels == te.labels)), query_scheme=str(scheme),
             mask_size=n_mask, test_size=len(te), private=m.private)


def cmd_retrain(ns, rec: Recorder):
    m = _require_model(ns)
    tr, te = _splits(ns)
    h = m.config.encode(tr.samples)
    q = m.config.encode(te.samples)
    for epoch in range(ns.epochs):
        m, wrong = retrain_epoch(m, h, tr.labels)
        rec.emit("retrain", epoch=epoch + 1, mispredictions=wrong,
                 test_accuracy=accuracy(m, q, te.labels))
    _save(ns, m)


def cmd_prune(ns, rec: Recorder):
    m = _require_model(ns)
    tr, te = _splits(ns)
    s = _single(ns.prune_percent, "--prune-percent")
    h = m.config.encode(tr.samples)
    q = m.config.encode(te.samples)
    before = accuracy(m, q, te.labels)
    m, mask = prune(m, s)
    rec.emit("prune", prune_percent=s, kept_dims=mask.count_kept, accuracy_before=before,
             accuracy_after=accuracy(m, q, te.labels))
    for epoch in range(ns.epochs):
        m, wrong = retrain_epoch(m, h, tr.labels)
        rec.emit("retrain", epoch=epoch + 1, mispredictions=wrong,
                 test_accuracy=accuracy(m, q, te.labels))
    _save(ns, m)


def _dp_grid(ns, rec: Recorder, event: str):
    tr, te = _splits(ns)
    scheme = _scheme(ns, "ternary")
    s = _single(ns.prune_percent, "--prune-percent")
    last = None
    for d_hv in ns.d_hv:
        enc = _enc_config(ns, tr, d_hv, scheme)
        h, q = enc.encode(tr.samples), enc.encode(te.samples)
        for eps in ns.epsilon:
            cfg = PipelineConfig(d_hv, ns.levels, ns.encoding, scheme, s, ns.epochs, eps,
                                 ns.delta, ns.codebook_seed, ns.noise_seed)
            res = train_private(h, tr.labels, tr.num_classes, enc, cfg)
            sigma = res.params.sigma if res.params else 0.0
            rec.emit(event, epsilon=eps, delta=ns.delta, d_hv=d_hv, scheme=scheme,
                     sigma=sigma, delta_f=res.sensitivity.l2, l1=res.sensitivity.l1,
                     noise_std=sigma * res.sensitivity.l2, kept_dims=res.model.mask.count_kept,
                     accuracy=accuracy(res.model, q, te.labels),
                     clean_accuracy=accuracy(res.clean_model, q, te.labels))
            last = res
    if ns.model and len(ns.d_hv) == 1 and len(ns.epsilon) == 1:
        _save(ns, last.model)


def cmd_dp_train(ns, rec: Recorder):
    _dp_grid(ns, rec, "dp-train")


def _attack_codebook(ns, ds, d_hv):
    return _enc_config(ns, ds, d_hv, "none")


def _raw_encode(enc: EncodingConfig, samples):
    """Scalar attack path encodes raw values when they are integral."""
    if enc.variant == "scalar" and np.all(samples == np.round(samples)):
        return encode_scalar(samples.astype(np.int64), enc.codebook)
    return enc.encode_raw(samples)


def _attack_space(enc: EncodingConfig, samples):
    """Feature values the attacker tries to recover, plus their range."""
    if enc.variant == "scalar" and np.all(samples == np.round(samples)):
        return samples, enc.feature_range
    if enc.variant == "scalar":
        return map_features(samples, enc.feature_range, enc.levels).astype(np.float64), (0.0, enc.levels - 1.0)
    return samples, enc.feature_range


def cmd_attack(ns, rec: Recorder):
    tr, te = _splits(ns)
    d_hv = _single(ns.d_hv, "--d-hv")
    enc = _attack_codebook(ns, tr, d_hv)
    cb = enc.codebook
    scheme = QuantScheme.parse(_scheme(ns))
    n_mask = _single(ns.mask_size, "--mask-size")
    side = math.isqrt(tr.d_iv)
    if ns.pgm_dir:
        os.makedirs(ns.pgm_dir, exist_ok=True)
    reports = []
    if ns.target == "query":
        mask = DimensionMask.random(d_hv, n_mask, ns.mask_seed)
        n = min(ns.attack_samples, len(te))
        raw = _raw_encode(enc, te.samples[:n])
        truth, rng = _attack_space(enc, te.samples[:n])
        for i in range(n):
            q = obfuscate_query(raw[i], scheme, mask, tr.d_iv)
            base = breach_report(raw[i], cb, truth[i], variant=enc.variant, feature_range=rng)
            rep = breach_report(q, cb, truth[i], variant=enc.variant, feature_range=rng,
                                scheme=scheme, mask=mask, rescale_mode=ns.rescale)
            reports.append((base, rep))
            rec.emit("attack-query", sample=i, label=int(te.labels[i]), **rep.to_record(),
                     baseline_mse=base.mse, baseline_psnr_db=base.psnr_db)
            if ns.pgm_dir and side * side == tr.d_iv:
                peak = int(rng[1])
                write_pgm(os.path.join(ns.pgm_dir, f"query{i}_original.pgm"), truth[i], side, side, peak)
                write_pgm(os.path.join(ns.pgm_dir, f"query{i}_plain.pgm"), base.recovered, side, side, peak)
                write_pgm(os.path.join(ns.pgm_dir, f"query{i}_obfuscated.pgm"), rep.recovered, side, side, peak)
    else:
        h = _raw_encode(enc, tr.samples)
        truth, rng = _attack_space(enc, tr.samples)
        full = train(h, tr.labels, tr.num_classes, enc)
        eps = _single(ns.epsilon, "--epsilon")
        if not math.isinf(eps):
            # no quantization here, so the full-precision sensitivity applies
            full = dp_release(full, sensitivity_l2(tr.d_iv, d_hv), calibrate(eps, ns.delta),
                              ns.noise_seed, eps, ns.delta)
        for i in range(min(ns.attack_samples, len(tr))):
            keep = np.ones(len(tr), dtype=bool)
            keep[i] = False
            smaller = train(h[keep], tr.labels[keep], tr.num_classes, enc)
            rep = breach_report(full, cb, truth[i], other=smaller, class_index=int(tr.labels[i]),
                                variant=enc.variant, feature_range=rng)
            reports.append((None, rep))
            rec.emit("attack-adjacent", sample=i, epsilon=eps, **rep.to_record())
            if ns.pgm_dir and side * side == tr.d_iv:
                peak = int(rng[1])
                write_pgm(os.path.join(ns.pgm_dir, f"adjacent{i}_recovered.pgm"), rep.recovered, side, side, peak)
    mse = [r.mse for _, r in reports]
    summary = {"mean_mse": float(np.mean(mse)),
               "mean_psnr_db": float(np.mean([r.psnr_db for _, r in reports]))}
    if ns.target == "query":
        base_mse = float(np.mean([b.mse for b, _ in reports]))
        summary.update(baseline_mean_mse=base_mse,
                       baseline_mean_psnr_db=float(np.mean([b.psnr_db for b, _ in reports])),
                       mse_ratio=summary["mean_mse"] / base_mse if base_mse else math.inf)
    rec.emit("attack-summary", target=ns.target, samples=len(reports), **summary)


def cmd_hw_sim(ns, rec: Recorder):
    d_iv = ns.d_iv
    for mode in ("binary", "ternary"):
        rec.emit("lut-cost", **hwsim.lut_cost(d_iv, mode).to_record())
    rec.emit("agreement", mode="binary", d_iv=d_iv, trials=ns.trials,
             agreement=hwsim.binary_agreement(d_iv, ns.trials, ns.ties_seed))
    t_trials = max(1, ns.trials // 10)
    rec.emit("agreement", mode="ternary", d_iv=d_iv, trials=t_trials,
             agreement=hwsim.ternary_agreement(d_iv, t_trials, ns.ties_seed))
    if ns.end_to_end:
        tr, te = _splits(ns)
        d_hv = _single(ns.d_hv, "--d-hv")
        enc = _enc_config(ns, tr, d_hv, "binary")
        ties = hwsim.TieBreakTable(ns.ties_seed, d_hv, tr.d_iv)
        idx_tr = map_features(tr.samples, enc.feature_range, enc.levels)
        idx_te = map_features(te.samples, enc.feature_range, enc.levels)
        exact_acc = accuracy(train(enc.encode(tr.samples), tr.labels, tr.num_classes, enc),
                             enc.encode(te.samples), te.labels)
        hw_tr = hwsim.hw_encode_binary(idx_tr, enc.codebook, ties)
        hw_te = hwsim.hw_encode_binary(idx_te, enc.codebook, ties)
        hw_acc = accuracy(train(hw_tr, tr.labels, tr.num_classes, enc), hw_te, te.labels)
        rec.emit("hw-end-to-end", d_hv=d_hv, exact_accuracy=exact_acc, hw_accuracy=hw_acc,
                 gap_points=100 * (exact_acc - hw_acc),
                 dim_agreement=float(np.mean(hw_te == enc.encode(te.samples))))


def _sweep_inference(ns, rec: Recorder):
    tr, te = _splits(ns)
    schemes = ns.scheme or ["none", "binary"]
    n_attack = min(ns.attack_samples, len(te))
    for d_hv in ns.d_hv:
        enc = _enc_config(ns, tr, d_hv, "none")
        m = train(enc.encode_raw(tr.samples), tr.labels, tr.num_classes, enc)
        raw_te = enc.encode_raw(te.samples)
        attack_raw = _raw_encode(enc, te.samples[:n_attack])
        truth, rng = _attack_space(enc, te.samples[:n_attack])
        for scheme in schemes:
            qs = QuantScheme.parse(scheme)
            for n_mask in ns.mask_size:
                if n_mask >= d_hv:
                    raise ConfigError(f"mask size {n_mask} >= d_hv {d_hv}")
                mask = DimensionMask.random(d_hv, n_mask, ns.mask_seed)
                q = obfuscate_query(raw_te, qs, mask, tr.d_iv)
                reps = [breach_report(obfuscate_query(attack_raw[i], qs, mask, tr.d_iv),
                                      enc.codebook, truth[i], variant=enc.variant,
                                      feature_range=rng, scheme=qs, mask=mask)
                        for i in range(n_attack)]
                rec.emit("sweep-inference", d_hv=d_hv, scheme=scheme, mask_size=n_mask,
                         accuracy=accuracy(m, q, te.labels),
                         mse=float(np.mean([r.mse for r in reps])),
                         psnr_db=float(np.mean([r.psnr_db for r in reps])))


def _sweep_data_size(ns, rec: Recorder):
    ds = load_dataset(ns)
    scheme = _scheme(ns, "ternary")
    d_hv = _single(ns.d_hv, "--d-hv")
    eps = _single(ns.epsilon, "--epsilon")
    for frac in ns.train_fractions:
        tr, te = split(ds, frac, ns.split_seed)
        enc = _enc_config(ns, tr, d_hv, scheme)
        h, q = enc.encode(tr.samples), enc.encode(te.samples)
        m = train(h, tr.labels, tr.num_classes, enc)
        if ns.noise_std is not None:
            delta_f, sigma = ns.noise_std, 1.0
        else:
            delta_f, sigma = sensitivity_report(enc).l2, (0.0 if math.isinf(eps) else calibrate(eps, ns.delta))
        accs = [accuracy(dp_release(m, delta_f, sigma, ns.noise_seed + k), q, te.labels)
                for k in range(ns.noise_seeds)]
        rec.emit("sweep-data-size", train_fraction=frac, train_size=len(tr),
                 noise_std=delta_f * sigma, accuracy=float(np.mean(accs)))


def _sweep_prune(ns, rec: Recorder):
    tr, te = _splits(ns)
    scheme = _scheme(ns)
    for d_hv in ns.d_hv:
        enc = _enc_config(ns, tr, d_hv, scheme)
        h, q = enc.encode(tr.samples), enc.encode(te.samples)
        base = train(h, tr.labels, tr.num_classes, enc)
        for s in ns.prune_percent:
            m, _ = prune(base, s)
            rec.emit("sweep-prune", d_hv=d_hv, scheme=scheme, prune_percent=s, epoch=0,
                     accuracy=accuracy(m, q, te.labels))
            for epoch in range(ns.epochs):
                m, wrong = retrain_epoch(m, h, tr.labels)
                rec.emit("sweep-prune", d_hv=d_hv, scheme=scheme, prune_percent=s,
                         epoch=epoch + 1, mispredictions=wrong, accuracy=accuracy(m, q, te.labels))


def cmd_sweep(ns, rec: Recorder):
    if ns.kind == "inference":
        _sweep_inference(ns, rec)
    elif ns.kind == "dp":
        _dp_grid(ns, rec, "sweep-dp")
    elif ns.kind == "data-size":
        _sweep_data_size(ns, rec)
    else:
        _sweep_prune(ns, rec)
    if ns.csv:
        write_records_csv(rec.records, ns.csv)


def write_records_csv(records, path):
    keys = sorted({k for r in records for k in r})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow({k: r.get(k, "") for k in keys})
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


COMMANDS = {
    "gen-data": cmd_gen_data, "train": cmd_train, "predict": cmd_predict,
    "retrain": cmd_retrain, "prune": cmd_prune, "dp-train": cmd_dp_train,
    "attack": cmd_attack, "hw-sim": cmd_hw_sim, "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    try:
        ns = parse_args(sys.argv[1:] if argv is None else argv)
        with _open_output(ns.output) as stream:
            COMMANDS[ns.command](ns, Recorder(ns, stream))
    except HDError as exc:
        print(f"hdprivacy: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"hdprivacy: io error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
