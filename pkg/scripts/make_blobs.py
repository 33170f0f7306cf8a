"""Write the seeded Gaussian-blob band CSV (and optionally a raw-session directory)."""
import argparse

from mentalstate.dataset import write_band_csv
from mentalstate.synthetic import make_blob_sessions, write_raw_session


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="blobs.csv")
    p.add_argument("--sessions-per-class", type=int, default=10)
    p.add_argument("--frames", type=int, default=50, help="frames per session")
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--distance", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--raw-dir", help="also write this many seconds of raw recordings per subject here")
    p.add_argument("--raw-subjects", type=int, default=3)
    p.add_argument("--raw-seconds", type=float, default=10.0)
    args = p.parse_args()

    ds = make_blob_sessions(args.sessions_per_class, args.frames, args.sigma, args.distance, args.seed)
    write_band_csv(args.out, ds)
    print(f"wrote {len(ds)} frames {ds.class_counts} to {args.out}")
    if args.raw_dir:
        for i in range(args.raw_subjects):
            write_raw_session(args.raw_dir, f"s{i:02d}", args.raw_seconds, seed=args.seed + i)
        print(f"wrote {args.raw_subjects} raw sessions to {args.raw_dir}")


if __name__ == "__main__":
    main()
