"""Mean bias per symbol over the standard frame, as plot-ready CSV.

    python scripts/bias_curves.py --out results/bias

``curves.csv`` holds one row per (mode, SNR, symbol index); the script also
prints mean |bias| per frame region so mode differences are visible without
plotting.
"""

import argparse
from pathlib import Path

import numpy as np

from wbansync.cli import load_config
from wbansync.frame import FrameLayout
from wbansync.harness import Scenario, monte_carlo
from wbansync.report import emit_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=Path(__file__).resolve().parent.parent / "configs" / "bias_standard_frame.yaml")
    ap.add_argument("--out", default="results/bias")
    ap.add_argument("--trials", type=int)
    args = ap.parse_args()
    values = load_config(args.config)
    if args.trials:
        values["trials"] = args.trials
    report = monte_carlo(Scenario.from_mapping(values))
    emit_report(report, args.out)
    bounds = FrameLayout.standard().bounds()
    print("mode,snr_db," + ",".join(f"mean_abs_bias_{r.kind.value}" for _, _, r in bounds))
    for c in report.cells:
        parts = [f"{np.mean(np.abs(c.bias_mean[a:b])):.5f}" for a, b, _ in bounds]
        print(f"{c.mode},{c.snr_db:g}," + ",".join(parts))


if __name__ == "__main__":
    main()
