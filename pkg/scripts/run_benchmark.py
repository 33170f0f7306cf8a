"""Train all five model kinds and print the accuracy / CI / time / potential table.

Without --data this runs on the seeded blob fixture (1500 frames and 1500
windows, 80/20 split), which every trained model should nearly solve.
"""
import argparse
import time

from mentalstate import eval as ev
from mentalstate import models
from mentalstate.dataset import LabeledDataset, SplitSpec, load_band_csv, split, to_windows
from mentalstate.synthetic import make_blob_windows, make_blobs


def blob_splits(n, spec):
    f = LabeledDataset.from_arrays(*make_blobs(n, seed=spec.seed))
    w = LabeledDataset.from_arrays(*make_blob_windows(n, seed=spec.seed + 1))
    return split(f, spec), split(w, spec)


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--data", help="band CSV; omit for the blob fixture")
    p.add_argument("--demographics")
    p.add_argument("--n", type=int, default=1500, help="blob fixture size")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--by-subject", action="store_true")
    p.add_argument("--out", help="report base path; writes .jsonl and .csv")
    args = p.parse_args()

    spec = SplitSpec(0.8, args.seed, args.by_subject)
    if args.data:
        frames = load_band_csv(args.data, args.demographics)
        print(f"{len(frames)} frames, class counts {frames.class_counts}")
        (f_train, f_test), (w_train, w_test) = split(frames, spec), split(to_windows(frames), spec)
    else:
        (f_train, f_test), (w_train, w_test) = blob_splits(args.n, spec)

    trained = {}
    for kind in models.KINDS:
        data = w_train if models.INPUT_MODE[kind] == "window" else f_train
        t0 = time.perf_counter()
        trained[kind] = models.train(kind, data, models.default_config(kind, seed=args.seed))
        print(f"trained {kind:6s} on {len(data)} rows in {time.perf_counter() - t0:.1f} s")

    report = ev.benchmark(trained, {"frame": f_test, "window": w_test}, args.repeats, args.seed)
    print(f"\n{'model':7s} {'accuracy':>8s} {'ci':>7s} {'eval_s':>9s} {'potential':>10s} {'n':>5s}")
    for r in report.results:
        pot = "0 (base)" if r.is_baseline else f"{r.potential:.2f}"
        print(f"{r.model:7s} {r.accuracy:8.4f} {r.ci:7.4f} {r.eval_seconds:9.5f} {pot:>10s} {r.n_test:5d}")
    print(f"mean CI over trained models: {report.mean_ci:.4f}")
    if args.out:
        for fmt in ("jsonl", "csv"):
            print("wrote", ev.emit_report(report, f"{args.out}.{fmt}", fmt))


if __name__ == "__main__":
    main()
