"""Detector S-curves (mean error against timing hypothesis) for every mode.

    python scripts/s_curves.py --snr-db 5 --frames 200 --out results/s_curve_5db.csv
"""

import argparse
import csv

import numpy as np

from wbansync.frame import FrameLayout, Modulation, build_frame_bits
from wbansync.mapping import map_stream
from wbansync.synchronizer import Mode, s_curve
from wbansync.waveform import add_noise, matched_filter, noise_sigma2, shape, srrc_taps


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--snr-db", type=float, default=5.0)
    ap.add_argument("--tau", type=float, default=0.1)
    ap.add_argument("--frames", type=int, default=200)
    ap.add_argument("--symbols", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="s_curve.csv")
    args = ap.parse_args()

    pulse = srrc_taps()
    u = np.linspace(args.tau - 0.5, args.tau + 0.5, 101)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["modulation", "mode", "u", "mean_error"])
        for mod in Modulation:
            layout = FrameLayout.block(args.symbols, mod)
            banks, streams = [], []
            for child in np.random.SeedSequence(args.seed).spawn(args.frames):
                bseed, nseed = child.spawn(2)
                stream = map_stream(build_frame_bits(layout, bseed), layout)
                banks.append(matched_filter(add_noise(shape(stream, pulse, args.tau), args.snr_db, nseed), pulse))
                streams.append(stream)
            for mode in Mode:
                g = s_curve(banks, layout, streams, u, mode, noise_sigma2(args.snr_db))
                w.writerows([mod.value, mode.value, f"{ui:.4f}", repr(float(gi))] for ui, gi in zip(u, g))
                i = np.searchsorted(u, args.tau)
                slope = (g[i + 1] - g[i - 1]) / (u[i + 1] - u[i - 1])
                print(f"{mod.value} {mode.value}: slope at tau {slope:.3f}")


if __name__ == "__main__":
    main()
