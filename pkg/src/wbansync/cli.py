"""``sync-sim`` command line for Monte-Carlo sweeps and the S-curve and CRB diagnostics.

Exit codes: 0 success, 1 invalid configuration, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from .crb import crb_reference
from .frame import FrameLayout, Modulation, build_frame_bits
from .harness import ConfigError, Scenario, monte_carlo
from .mapping import map_stream
from .report import emit_report
from .synchronizer import LoopConfig, Mode, s_curve
from .waveform import add_noise, matched_filter, noise_sigma2, shape, srrc_taps

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("wbansync")


def _floats(values):
    return [float(x) for v in values for x in str(v).split(",") if x.strip()]


def _strs(values):
    return [x.strip() for v in values for x in str(v).split(",") if x.strip()]


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(data, dict) or any(isinstance(v, dict) for v in data.values()):
        raise ConfigError(f"config {path} must be a flat key/value mapping")
    return data


def scenario_from_args(args) -> Scenario:
    values = load_config(args.config) if args.config else {}
    overrides = {
        "snr_db": args.snr_db and _floats(args.snr_db),
        "tau": args.tau and _floats(args.tau),
        "modes": args.mode and _strs(args.mode),
        "modulations": args.modulation and _strs(args.modulation),
        "trials": args.trials,
        "master_seed": args.seed,
        "mu": args.mu,
        "rolloff": args.rolloff,
        "sps": args.sps,
        "frame": args.frame,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    if args.lowcomplexity_tanh:
        values["low_complexity_tanh"] = True
    return Scenario.from_mapping(values)


def cmd_run(args) -> int:
    scenario = scenario_from_args(args)
    report = monte_carlo(scenario, workers=args.workers)
    paths = emit_report(report, args.out, args.format)
    w = csv.writer(sys.stdout)
    w.writerow(["mode", "modulation", "snr_db", "tau_over_t", "mse", "crb", "clamp_rate"])
    for c in report.cells:
        w.writerow([c.mode, c.modulation, c.snr_db, c.tau_over_t, f"{c.mse:.4e}", f"{c.crb:.4e}",
                    f"{c.clamp_rate:.3f}"])
    for p in paths:
        log.info("wrote %s", p)
    return EXIT_OK


def cmd_scurve(args) -> int:
    modes = [Mode.parse(m) for m in _strs(args.mode or ["DA", "Soft", "NDA"])]
    snr = float(args.snr_db) if args.snr_db is not None else float("inf")
    sigma2 = noise_sigma2(snr) or noise_sigma2(args.soft_snr_db)
    if abs(args.tau) > 0.4:
        raise ConfigError("tau must lie in [-0.4, 0.4]")
    layout = FrameLayout.block(args.symbols, Modulation(args.modulation.upper()))
    pulse = srrc_taps(args.rolloff, 8, args.sps)
    rng = np.random.SeedSequence(args.seed)
    banks, streams = [], []
    for child in rng.spawn(args.frames):
        bseed, nseed = child.spawn(2)
        stream = map_stream(build_frame_bits(layout, bseed), layout)
        banks.append(matched_filter(add_noise(shape(stream, pulse, args.tau), snr, nseed), pulse))
        streams.append(stream)
    u = np.linspace(args.tau - args.halfwidth, args.tau + args.halfwidth, args.points)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["mode", "u", "mean_error"])
        for m in modes:
            for ui, ei in zip(u, s_curve(banks, layout, streams, u, m, sigma2, LoopConfig())):
                w.writerow([m.value, repr(float(ui)), repr(float(ei))])
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def cmd_crb(args) -> int:
    snrs = _floats(args.snr_db)
    w = csv.writer(sys.stdout)
    w.writerow(["snr_db", "block_len", "rolloff", "crb"])
    for s in snrs:
        w.writerow([s, args.block_len, args.rolloff, repr(crb_reference(s, args.block_len, args.rolloff))])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sync-sim", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte-Carlo MSE / bias sweep")
    run.add_argument("--config", help="flat YAML or JSON scenario file")
    run.add_argument("--snr-db", nargs="+")
    run.add_argument("--tau", nargs="+")
    run.add_argument("--mode", nargs="+", help="DA, NDA, Soft")
    run.add_argument("--modulation", nargs="+", help="payload modulation(s) for block frames")
    run.add_argument("--frame", choices=["block", "standard"])
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--mu", type=float)
    run.add_argument("--rolloff", type=float)
    run.add_argument("--sps", type=int)
    run.add_argument("--lowcomplexity-tanh", action="store_true")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--out", default="results")
    run.add_argument("--format", choices=["csv", "json"], default="csv")
    run.set_defaults(func=cmd_run)

    sc = sub.add_parser("scurve", help="mean detector output versus timing hypothesis")
    sc.add_argument("--tau", type=float, default=0.1)
    sc.add_argument("--snr-db", type=float, help="omit for noise-free frames")
    sc.add_argument("--soft-snr-db", type=float, default=10.0,
                    help="noise level assumed by the soft demapper on noise-free frames")
    sc.add_argument("--mode", nargs="+")
    sc.add_argument("--modulation", default="DBPSK")
    sc.add_argument("--symbols", type=int, default=200)
    sc.add_argument("--frames", type=int, default=1)
    sc.add_argument("--seed", type=int, default=0)
    sc.add_argument("--halfwidth", type=float, default=0.5)
    sc.add_argument("--points", type=int, default=101)
    sc.add_argument("--rolloff", type=float, default=0.3)
    sc.add_argument("--sps", type=int, default=8)
    sc.add_argument("--out")
    sc.set_defaults(func=cmd_scurve)

    crb = sub.add_parser("crb", help="data-aided Cramer-Rao bound of tau/T")
    crb.add_argument("--snr-db", nargs="+", required=True)
    crb.add_argument("--block-len", type=int, default=100)
    crb.add_argument("--rolloff", type=float, default=0.3)
    crb.set_defaults(func=cmd_crb)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"sync-sim: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        if args.command in ("crb", "scurve"):
            print(f"sync-sim: invalid arguments: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"sync-sim: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - surface any runtime failure as exit 2
        print(f"sync-sim: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
