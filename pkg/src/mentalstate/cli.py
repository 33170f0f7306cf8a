"""Command-line entry point: preprocess, train, evaluate, benchmark, stream."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import dataset as ds_mod
from . import eval as ev
from . import models
from .errors import IO_EXIT_CODE, MentalStateError, ParameterError
from .features import WINDOW_STRIDE, WINDOW_WIDTH
from .signal import DEFAULT_BANDS, BandTable
from .stream import StreamSession, replay

log = logging.getLogger("mentalstate")

SEED_ENV = "MENTALSTATE_SEED"
GENERAL_DEFAULTS = {
    "seed": 42,
    "split_fraction": 0.8,
    "stride": WINDOW_STRIDE,
    "window": WINDOW_WIDTH,
    "repeats": 5,
    "emit_stride": 1,
}


def read_kv_config(path) -> dict[str, str]:
    out = {}
    if path is None:
        return out
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParameterError(f"{path} line {lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


class Settings:
    """Resolved options: explicit flag, then config file, then environment (seed only), then default."""

    def __init__(self, args):
        self.args = args
        self.file = read_kv_config(getattr(args, "config", None))
        for item in getattr(args, "set", None) or []:
            key, sep, value = item.partition("=")
            if not sep:
                raise ParameterError(f"--set expects key=value, got {item!r}")
            self.file[key.strip().replace("-", "_")] = value.strip()

    def get(self, name: str):
        value = getattr(self.args, name, None)
        if value is not None:
            return value
        default = GENERAL_DEFAULTS[name]
        if name in self.file:
            return type(default)(self.file[name])
        if name == "seed" and os.environ.get(SEED_ENV):
            return int(os.environ[SEED_ENV])
        return default

    def model_config(self, kind: str):
        overrides = models.coerce_overrides(kind, self.file)
        overrides["seed"] = self.get("seed")
        return models.default_config(kind, **overrides)

    def split_spec(self) -> ds_mod.SplitSpec:
        return ds_mod.SplitSpec(self.get("split_fraction"), self.get("seed"), bool(getattr(self.args, "by_subject", False)))


def load_frames(args) -> ds_mod.LabeledDataset:
    return ds_mod.load_band_csv(args.data, getattr(args, "demographics", None), getattr(args, "label_column", None))


def cmd_preprocess(args, settings) -> int:
    bands = BandTable.from_file(args.band_table) if args.band_table else DEFAULT_BANDS
    ds = ds_mod.load_raw_sessions(args.data, args.channel, not args.all_subjects, bands, args.cutoff)
    if len(ds) == 0:
        log.warning("no frames produced from %s; writing header only", args.data)
    ds_mod.write_band_csv(args.out, ds)
    print(f"wrote {len(ds)} frames to {args.out}")
    return 0


def _training_data(args, settings, kind):
    frames = load_frames(args)
    if kind == "cnn" and not args.windowed:
        raise ParameterError("cnn trains on 20x11 window maps; pass --windowed to build them from the frame rows")
    data = ds_mod.to_windows(frames, settings.get("window"), settings.get("stride")) if args.windowed else frames
    return data


def cmd_train(args, settings) -> int:
    kind = models.base.canonical_kind(args.kind)
    data = _training_data(args, settings, kind)
    train, test = ds_mod.split(data, settings.split_spec())
    print(f"kind={kind} mode={data.mode} train={len(train)} test={len(test)} class_counts={data.class_counts}")
    model = models.train(kind, train, settings.model_config(kind))
    train_acc = ev.accuracy(model.predict_labels(train.X), train.y)
    test_acc = ev.accuracy(model.predict_labels(test.X), test.y)
    summary = f"train_accuracy={train_acc:.4f} test_accuracy={test_acc:.4f}"
    if "loss" in model.history:
        summary += f" final_loss={model.history['loss'][-1]:.6f} epochs={len(model.history['loss']) - 1}"
    print(summary)
    models.save(model, args.model)
    print(f"saved {args.model}")
    return 0


def _emit(report, out, fmt):
    out = Path(out)
    formats = ("jsonl", "csv") if fmt == "both" else (fmt,)
    paths = []
    for f in formats:
        target = out if len(formats) == 1 and out.suffix else out.with_suffix("." + f)
        paths.append(ev.emit_report(report, target, f))
    return paths


def _print_report(report):
    for r in report.results:
        flag = " (baseline)" if r.is_baseline else ""
        print(f"{r.model:7s} accuracy={r.accuracy:.4f} ci=±{r.ci:.4f} eval_seconds={r.eval_seconds:.6f} "
              f"potential={r.potential:.3f} n_test={r.n_test}{flag}")


def cmd_evaluate(args, settings) -> int:
    model = models.load(args.model)
    frames = load_frames(args)
    data = frames
    if model.input_mode == "window":
        data = ds_mod.to_windows(frames, settings.get("window"), settings.get("stride"))
    if not args.whole:
        data = ds_mod.split(data, settings.split_spec())[1]
    report = ev.benchmark({model.kind: model}, data, settings.get("repeats"), settings.get("seed"))
    _print_report(report)
    if args.out:
        for p in _emit(report, args.out, args.format):
            print(f"wrote {p}")
    return 0


def cmd_benchmark(args, settings) -> int:
    frames = load_frames(args)
    windows = ds_mod.to_windows(frames, settings.get("window"), settings.get("stride"))
    spec = settings.split_spec()
    f_train, f_test = ds_mod.split(frames, spec)
    w_train, w_test = ds_mod.split(windows, spec)
    print(f"frames train={len(f_train)} test={len(f_test)}; windows train={len(w_train)} test={len(w_test)}")
    trained = {}
    for kind in models.KINDS:
        train = w_train if models.INPUT_MODE[kind] == "window" else f_train
        trained[kind] = models.train(kind, train, settings.model_config(kind))
        log.info("trained %s", kind)
    report = ev.benchmark(trained, {"frame": f_test, "window": w_test}, settings.get("repeats"), settings.get("seed"))
    _print_report(report)
    for p in _emit(report, args.out, args.format):
        print(f"wrote {p}")
    return 0


def cmd_stream(args, settings) -> int:
    model = models.load(args.model)
    frames = load_frames(args)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        rate = 2.0 if args.throttle else None
        for run in ds_mod.session_runs(frames):
            session = StreamSession(model, settings.get("emit_stride"), on_decision=lambda d: print(d.to_json(), file=out))
            replay(session, frames.subset(run), rate)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mentalstate", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data_help="band-power CSV"):
        sp.add_argument("--data", required=True, help=data_help)
        sp.add_argument("--seed", type=int, help=f"random seed (default 42, or ${SEED_ENV})")
        sp.add_argument("--config", help="plain-text key=value config file; flags win")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="extra config entry, e.g. cnn.epochs=5")

    def csv_opts(sp):
        sp.add_argument("--demographics", help="subject_id,gender,age CSV (when the data has no gender/age columns)")
        sp.add_argument("--label-column", help="label column (default: label, else the self-reported confusion column)")
        sp.add_argument("--split-fraction", type=float, help="train fraction (default 0.8)")
        sp.add_argument("--by-subject", action="store_true", help="keep each subject on one side of the split")
        sp.add_argument("--window", type=int, help="window width in frames (default 20)")
        sp.add_argument("--stride", type=int, help="window stride in frames (default 11)")

    sp = sub.add_parser("preprocess", help="raw sessions -> band-power CSV")
    common(sp, "raw session directory")
    sp.add_argument("--out", required=True)
    sp.add_argument("--band-table", help="band table config (delta=0.5:2.75 ...)")
    sp.add_argument("--channel", default="A1")
    sp.add_argument("--all-subjects", action="store_true", help="include non-expert sessions")
    sp.add_argument("--cutoff", type=float, default=0.5, help="high-pass cutoff in Hz")
    sp.set_defaults(func=cmd_preprocess)

    sp = sub.add_parser("train", help="train one classifier and save it")
    common(sp)
    csv_opts(sp)
    sp.add_argument("--kind", required=True, choices=models.KINDS)
    sp.add_argument("--model", required=True, help="output model file")
    sp.add_argument("--windowed", action="store_true", help="train on sliding-window maps (required for cnn)")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("evaluate", help="evaluate a saved model on the test split")
    common(sp)
    csv_opts(sp)
    sp.add_argument("--model", required=True)
    sp.add_argument("--whole", action="store_true", help="evaluate on every row instead of the test split")
    sp.add_argument("--repeats", type=int)
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("jsonl", "csv", "both"), default="jsonl")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("benchmark", help="train and compare all five model kinds")
    common(sp)
    csv_opts(sp)
    sp.add_argument("--repeats", type=int)
    sp.add_argument("--out", required=True, help="report path (suffix replaced per format)")
    sp.add_argument("--format", choices=("jsonl", "csv", "both"), default="both")
    sp.set_defaults(func=cmd_benchmark)

    sp = sub.add_parser("stream", help="replay a CSV through a saved model, one decision per line")
    common(sp)
    sp.add_argument("--demographics")
    sp.add_argument("--label-column")
    sp.add_argument("--model", required=True)
    sp.add_argument("--throttle", action="store_true", help="pace frames at 2 Hz real time")
    sp.add_argument("--emit-stride", type=int)
    sp.add_argument("--out", help="json-lines output (default stdout)")
    sp.set_defaults(func=cmd_stream)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        settings = Settings(args)
        return args.func(args, settings)
    except MentalStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO_EXIT_CODE


if __name__ == "__main__":
    sys.exit(main())
