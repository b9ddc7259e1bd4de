"""Scan the loop step size and report MSE of each mode against the reference values.

    python scripts/step_size_scan.py --mu 0.002 0.005 0.01 0.02 0.05

Used to choose the default step size: the score is the mean absolute log
ratio between measured and reference MSE over the DA cells.
"""

import argparse

import numpy as np

from wbansync.harness import Scenario, monte_carlo

DA_REFERENCE = {("DBPSK", 0.0, 0.1): 2.5e-3, ("DBPSK", 10.0, 0.1): 1.9e-4,
                ("DQPSK", 0.0, 0.1): 5e-3, ("DQPSK", 10.0, 0.1): 7e-4,
                ("DBPSK", 10.0, 0.3): 8.5e-4}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mu", type=float, nargs="+", default=[0.002, 0.004, 0.005, 0.006, 0.01, 0.02, 0.05])
    ap.add_argument("--trials", type=int, default=500)
    args = ap.parse_args()
    print("mu,score," + ",".join(f"{m}/{s:g}dB/tau{t:g}" for m, s, t in DA_REFERENCE))
    for mu in args.mu:
        ratios = []
        for (mod, snr, tau), ref in DA_REFERENCE.items():
            r = monte_carlo(Scenario(snr_db=snr, tau=tau, modes=("DA",), modulations=(mod,),
                                     trials=args.trials, mu=mu, bootstrap=10))
            ratios.append(r.cells[0].mse / ref)
        score = float(np.mean(np.abs(np.log(ratios))))
        print(f"{mu},{score:.3f}," + ",".join(f"{x:.2f}" for x in ratios))


if __name__ == "__main__":
    main()
