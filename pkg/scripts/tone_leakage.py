"""Where a pure tone's power lands in the 8-band table, per frame, for several tapers.

Shows the rectangular-frame leakage for tones between the 2 Hz bins, e.g.
10.5 Hz keeps only about 0.81 of its power in the 10 Hz bin.
"""
import argparse

import numpy as np

from mentalstate.signal import BAND_NAMES, band_power_matrix
from mentalstate.synthetic import sinusoid


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--freqs", type=float, nargs="+", default=[10.0, 10.5, 11.0, 7.3])
    p.add_argument("--fs", type=int, default=2048)
    p.add_argument("--amplitude", type=float, default=1.0)
    args = p.parse_args()

    print(f"{'freq':>6s} {'taper':6s} " + " ".join(f"{b:>8s}" for b in BAND_NAMES) + "   total")
    for f in args.freqs:
        x = sinusoid(f, 1.0, args.fs, args.amplitude)
        for taper in ("rect", "hann"):
            bands = band_power_matrix(x, args.fs, taper=taper)[0]
            print(f"{f:6.2f} {taper:6s} " + " ".join(f"{v:8.4f}" for v in bands) + f"  {bands.sum():.4f}")
    print(f"\nmean power of the tone: {args.amplitude ** 2 / 2:.4f}")


if __name__ == "__main__":
    main()
