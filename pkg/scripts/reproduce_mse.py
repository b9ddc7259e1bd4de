"""Run the MSE experiments and print measured values next to the reference targets.

    python scripts/reproduce_mse.py --out results/mse

Writes one report directory per experiment and prints a Markdown table per
experiment with the ratio measured/reference.
"""

import argparse
from pathlib import Path

from wbansync.cli import load_config
from wbansync.harness import Scenario, monte_carlo
from wbansync.report import emit_report

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

# reference MSE per (modulation, snr_db, tau) for DA, Soft, NDA
REFERENCE = {
    ("DBPSK", 0.0, 0.1): (2.5e-3, 3e-3, 4e-3),
    ("DBPSK", 10.0, 0.1): (1.9e-4, 2.1e-4, 5e-4),
    ("DQPSK", 0.0, 0.1): (5e-3, 1.5e-2, 2e-2),
    ("DQPSK", 10.0, 0.1): (7e-4, 1e-3, 4e-3),
    ("DBPSK", 10.0, 0.3): (8.5e-4, 1.5e-3, 9e-3),
}
MODES = ("DA", "Soft", "NDA")


def print_table(name, report):
    print(f"\n### {name}\n")
    print("| modulation | SNR dB | tau/T | mode | MSE | 95% CI | CRB | reference | ratio |")
    print("|---|---|---|---|---|---|---|---|---|")
    for c in report.cells:
        ref = REFERENCE.get((c.modulation, c.snr_db, c.tau_over_t))
        target = ref[MODES.index(c.mode)] if ref else None
        extra = f"{target:.2g} | {c.mse / target:.2f}" if target else "- | -"
        print(f"| {c.modulation} | {c.snr_db:g} | {c.tau_over_t:g} | {c.mode} | {c.mse:.3g} | "
              f"[{c.mse_ci_lo:.3g}, {c.mse_ci_hi:.3g}] | {c.crb:.3g} | {extra} |")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/mse")
    ap.add_argument("--trials", type=int, help="override the trial count of every experiment")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--experiments", nargs="+",
                    default=["mse_dbpsk", "mse_dqpsk", "mse_vs_delay", "mse_with_preamble"])
    args = ap.parse_args()
    for name in args.experiments:
        values = load_config(CONFIGS / f"{name}.yaml")
        if args.trials:
            values["trials"] = args.trials
        report = monte_carlo(Scenario.from_mapping(values), workers=args.workers)
        emit_report(report, Path(args.out) / name)
        print_table(name, report)


if __name__ == "__main__":
    main()
