"""Replay a blob session through a trained model and summarize decisions and latency."""
import argparse

import numpy as np

from mentalstate import models
from mentalstate.dataset import CLASS_NAMES, session_runs, to_windows
from mentalstate.stream import FRAME_RATE_HZ, StreamSession, replay
from mentalstate.synthetic import make_blob_sessions


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--kind", default="cnn", choices=models.KINDS)
    p.add_argument("--model", help="saved model file; trained on the blob fixture when omitted")
    p.add_argument("--emit-stride", type=int, default=1)
    p.add_argument("--throttle", action="store_true", help="pace at 2 frames per second")
    p.add_argument("--seed", type=int, default=42)
    args = p.parse_args()

    frames = make_blob_sessions(3, 40, seed=args.seed)
    if args.model:
        model = models.load(args.model)
    else:
        data = to_windows(frames, stride=1) if models.INPUT_MODE[args.kind] == "window" else frames
        model = models.train(args.kind, data, models.default_config(args.kind, seed=args.seed))

    rate = FRAME_RATE_HZ if args.throttle else None
    latencies = []
    for run in list(session_runs(frames))[:: 3]:
        rows = frames.subset(run)
        decisions = replay(StreamSession(model, args.emit_stride), rows, rate)
        labels = [CLASS_NAMES[d.label] for d in decisions]
        truth = CLASS_NAMES[rows.y[0]]
        latencies += [d.latency for d in decisions]
        print(f"subject {rows.subject[0]:>3s} ({truth}): {len(decisions)} decisions, "
              f"{labels.count(truth)}/{len(labels)} correct")
    lat = np.array(latencies)
    print(f"latency median {np.median(lat) * 1e3:.3f} ms, max {lat.max() * 1e3:.3f} ms "
          f"(frame period {1e3 / FRAME_RATE_HZ:.0f} ms)")


if __name__ == "__main__":
    main()
