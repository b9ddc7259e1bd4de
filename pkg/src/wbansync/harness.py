"""Seeded Monte-Carlo scenarios: frame -> channel -> matched filter -> timing loop.

Trials that share ``(frame, modulation, snr, tau)`` use the same payload and
noise realisations for every loop mode, so mode comparisons are paired.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import platform
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy

from . import __version__
from .crb import crb_reference
from .demapper import PriorLLRs
from .frame import (DEFAULT_DEGREE, DEFAULT_EXTENSION, DEFAULT_POLY, DEFAULT_SEED, FrameLayout,
                    Modulation, RegionKind, build_frame_bits, build_preamble)
from .mapping import SymbolStream, map_stream
from .report import CellResult, RunReport
from .synchronizer import LoopConfig, Mode, TimingTrajectory, run_loop_batch
from .waveform import add_noise, cached_pulse, matched_filter, noise_sigma2, shape

log = logging.getLogger(__name__)

STANDARD_LABEL = "DBPSK+DQPSK"


class ConfigError(ValueError):
    pass


class TrialError(RuntimeError):
    pass


@dataclass(frozen=True)
class Scenario:
    """A grid of ``modes x modulations x snr_db x tau`` cells.

    ``frame="block"`` runs ``preamble_symbols`` DA symbols followed by a
    ``block_symbols`` payload of each listed modulation (the MSE protocol);
    ``frame="standard"`` runs the 201-symbol PPDU and ignores ``modulations``.
    """

    snr_db: tuple[float, ...] = (0.0, 5.0, 10.0)
    tau: tuple[float, ...] = (0.1,)
    modes: tuple[Mode, ...] = (Mode.DA, Mode.SOFT, Mode.NDA)
    trials: int = 500
    master_seed: int = 20150601
    frame: str = "block"
    block_symbols: int = 100
    preamble_symbols: int = 0
    modulations: tuple[Modulation, ...] = (Modulation.DBPSK,)
    rolloff: float = 0.3
    span: int = 8
    sps: int = 8
    mu: float = 0.005
    tau0: float = 0.0
    low_complexity_tanh: bool = False
    tanh_threshold: float = 1.0
    preamble_extension: str = DEFAULT_EXTENSION
    preamble_poly: int = DEFAULT_POLY
    preamble_degree: int = DEFAULT_DEGREE
    preamble_seed: int = DEFAULT_SEED
    crb_block_len: int | None = None
    bootstrap: int = 1000
    batch_size: int = 500

    def __post_init__(self):
        try:
            fix = object.__setattr__
            fix(self, "snr_db", tuple(float(s) for s in _as_list(self.snr_db)))
            fix(self, "tau", tuple(float(t) for t in _as_list(self.tau)))
            fix(self, "modes", tuple(Mode.parse(m) for m in _as_list(self.modes)))
            fix(self, "modulations", tuple(_modulation(m) for m in _as_list(self.modulations)))
            fix(self, "preamble_extension", str(self.preamble_extension))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        for name in ("snr_db", "tau", "modes", "modulations"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be non-empty")
        if any(abs(t) > 0.4 for t in self.tau):
            raise ConfigError(f"all tau must lie in [-0.4, 0.4], got {self.tau}")
        if any(not math.isfinite(s) for s in self.snr_db):
            raise ConfigError("snr_db values must be finite")
        if self.frame not in ("block", "standard"):
            raise ConfigError(f"frame must be 'block' or 'standard', got {self.frame!r}")
        if self.bootstrap < 1 or self.batch_size < 1:
            raise ConfigError("bootstrap and batch_size must be >= 1")
        try:
            self.loop_config(Mode.DA)
            self.layouts()
            cached_pulse(self.rolloff, self.span, self.sps)
            for layout in self.layouts().values():
                self._preamble(layout)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_mapping(cls, values: dict) -> Scenario:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - names
        if unknown:
            raise ConfigError(f"unknown scenario keys: {', '.join(sorted(unknown))}")
        try:
            return cls(**values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["modes"] = [m.value for m in self.modes]
        d["modulations"] = [m.value for m in self.modulations]
        d["snr_db"], d["tau"] = list(self.snr_db), list(self.tau)
        return d

    def layouts(self) -> dict[str, FrameLayout]:
        if self.frame == "standard":
            return {STANDARD_LABEL: FrameLayout.standard()}
        return {m.value: FrameLayout.block(self.block_symbols, m, self.preamble_symbols)
                for m in self.modulations}

    def loop_config(self, mode: Mode) -> LoopConfig:
        return LoopConfig(mu=self.mu, tau0=self.tau0, payload_mode=mode,
                          low_complexity_tanh=self.low_complexity_tanh,
                          tanh_threshold=self.tanh_threshold, prior=PriorLLRs())

    def _preamble(self, layout: FrameLayout):
        n = layout.count(RegionKind.PREAMBLE)
        if not n:
            return None
        pre = build_preamble(self.preamble_extension, self.preamble_degree,
                             self.preamble_poly, self.preamble_seed)
        if len(pre) != n:
            raise ValueError(f"preamble has {len(pre)} bits (m-sequence + extension), "
                             f"layout expects {n}")
        return pre

    def crb_len(self, layout: FrameLayout) -> int:
        return self.crb_block_len or layout.total_symbols

    def cells(self) -> list[Cell]:
        return [Cell(mode, label, snr, tau) for label in self.layouts()
                for snr in self.snr_db for tau in self.tau for mode in self.modes]


def _modulation(m) -> Modulation:
    return m if isinstance(m, Modulation) else Modulation(str(m).upper())


def _as_list(v):
    if isinstance(v, (str, Mode, Modulation)) or np.ndim(v) == 0:
        return [v]
    return list(v)


@dataclass(frozen=True)
class Cell:
    mode: Mode
    modulation: str
    snr_db: float
    tau: float

    @property
    def group(self) -> tuple:
        """Key shared by all modes: same bits and noise for each."""
        return (self.modulation, self.snr_db, self.tau)


def group_hash(scenario: Scenario, group: tuple) -> int:
    label = f"{scenario.frame}|{group[0]}|{group[1]!r}|{group[2]!r}"
    return zlib.crc32(label.encode())


def trial_seeds(scenario: Scenario, group: tuple, trial_index: int):
    """Independent ``SeedSequence``s for payload bits and noise of one trial."""
    h = group_hash(scenario, group)
    payload = np.random.SeedSequence(scenario.master_seed, spawn_key=(h, trial_index, 0))
    noise = np.random.SeedSequence(scenario.master_seed, spawn_key=(h, trial_index, 1))
    return payload, noise


@dataclass
class _Trials:
    streams: list[SymbolStream] = field(default_factory=list)
    banks: list = field(default_factory=list)


def simulate_received(scenario: Scenario, group: tuple, trial_indices) -> _Trials:
    label, snr, tau = group
    layout = scenario.layouts()[label]
    pulse = cached_pulse(scenario.rolloff, scenario.span, scenario.sps)
    preamble = scenario._preamble(layout)
    out = _Trials()
    for t in trial_indices:
        pseed, nseed = trial_seeds(scenario, group, t)
        bits = build_frame_bits(layout, pseed, preamble=preamble)
        stream = map_stream(bits, layout)
        rx = add_noise(shape(stream, pulse, tau), snr, nseed)
        out.streams.append(stream)
        out.banks.append(matched_filter(rx, pulse))
    return out


def run_trial(scenario: Scenario, cell: Cell, trial_index: int) -> tuple[TimingTrajectory, float]:
    """One trial of ``cell``; returns the trajectory and ``tau_hat_final - tau``."""
    layout = scenario.layouts()[cell.modulation]
    sim = simulate_received(scenario, cell.group, [trial_index])
    traj = run_loop_batch(sim.banks, layout, sim.streams, noise_sigma2(cell.snr_db),
                          scenario.loop_config(cell.mode))[0]
    return traj, traj.final - cell.tau


def bootstrap_counts(n: int, resamples: int, seed) -> np.ndarray:
    """Multinomial resampling weights, one row per bootstrap replicate."""
    rng = np.random.default_rng(seed)
    return rng.multinomial(n, np.full(n, 1.0 / n), size=resamples).astype(float)


def bootstrap_seed(scenario: Scenario, group: tuple):
    return np.random.SeedSequence(scenario.master_seed,
                                  spawn_key=(group_hash(scenario, group), 2**31 - 1))


def aggregate(cell: Cell, estimates: np.ndarray, clamp_flags: np.ndarray, counts: np.ndarray,
              crb: float) -> CellResult:
    """Reduce per-trial trajectories (trials x symbols, in trial order)."""
    n = estimates.shape[0]
    dev = estimates - cell.tau
    final = dev[:, -1]
    sq = final**2
    boot_bias = counts @ dev / n
    boot_mse = counts @ sq / n
    lo, hi = np.percentile(boot_bias, [2.5, 97.5], axis=0)
    mlo, mhi = np.percentile(boot_mse, [2.5, 97.5])
    return CellResult(
        mode=cell.mode.value, modulation=cell.modulation, snr_db=cell.snr_db,
        tau_over_t=cell.tau, bias_mean=dev.mean(axis=0), bias_ci_lo=lo, bias_ci_hi=hi,
        mse=float(sq.mean()), mse_ci_lo=float(mlo), mse_ci_hi=float(mhi), crb=crb,
        trials=n, clamp_rate=float(np.mean(clamp_flags.any(axis=1))),
        mse_stderr=float(sq.std(ddof=1) / np.sqrt(n)) if n > 1 else math.nan,
        final_errors=final)


def run_group(scenario: Scenario, group: tuple, modes) -> list[CellResult]:
    label, snr, tau = group
    layout = scenario.layouts()[label]
    n = layout.total_symbols
    sigma2 = noise_sigma2(snr)
    est = {m: np.empty((scenario.trials, n)) for m in modes}
    clamp = {m: np.empty((scenario.trials, n), dtype=bool) for m in modes}
    for start in range(0, scenario.trials, scenario.batch_size):
        idx = range(start, min(start + scenario.batch_size, scenario.trials))
        try:
            sim = simulate_received(scenario, group, idx)
            for m in modes:
                trajs = run_loop_batch(sim.banks, layout, sim.streams, sigma2,
                                       scenario.loop_config(m))
                for i, tr in zip(idx, trajs):
                    est[m][i] = tr.estimates
                    clamp[m][i] = tr.clamped
        except Exception as exc:
            raise TrialError(f"cell group {group} failed in trials {idx.start}..{idx.stop - 1}: "
                             f"{type(exc).__name__}: {exc}") from exc
    counts = bootstrap_counts(scenario.trials, scenario.bootstrap, bootstrap_seed(scenario, group))
    crb = crb_reference(snr, scenario.crb_len(layout), scenario.rolloff)
    return [aggregate(Cell(m, label, snr, tau), est[m], clamp[m], counts, crb) for m in modes]


def _groups(scenario: Scenario) -> list[tuple]:
    seen = []
    for c in scenario.cells():
        if c.group not in seen:
            seen.append(c.group)
    return seen


def monte_carlo(scenario: Scenario, workers: int = 1) -> RunReport:
    """All cells of ``scenario``; results do not depend on ``workers`` or batch size."""
    groups = _groups(scenario)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_group, [scenario] * len(groups), groups,
                                    [scenario.modes] * len(groups)))
    else:
        results = []
        for g in groups:
            log.info("running %s", g)
            results.append(run_group(scenario, g, scenario.modes))
    by_key = {(r.mode, r.modulation, r.snr_db, r.tau_over_t): r for res in results for r in res}
    cells = [by_key[(c.mode.value, c.modulation, c.snr_db, c.tau)] for c in scenario.cells()]
    return RunReport(cells, metadata=run_metadata(scenario))


def run_metadata(scenario: Scenario) -> dict:
    return {
        "config": scenario.to_dict(),
        "master_seed": scenario.master_seed,
        "versions": {"wbansync": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
    }


def paired_difference_bounds(err_a: np.ndarray, err_b: np.ndarray, resamples: int = 1000,
                             seed=0, level: float = 0.95) -> tuple[float, float]:
    """Two-sided bootstrap interval for ``MSE_b - MSE_a`` over paired trials."""
    diff = np.asarray(err_b) ** 2 - np.asarray(err_a) ** 2
    counts = bootstrap_counts(len(diff), resamples, seed)
    boot = counts @ diff / len(diff)
    a = (1 - level) / 2
    lo, hi = np.percentile(boot, [100 * a, 100 * (1 - a)])
    return float(lo), float(hi)


def ordering_confidence(*final_errors: np.ndarray, resamples: int = 1000, seed=0) -> float:
    """Fraction of paired bootstrap replicates with ``MSE_0 <= MSE_1 <= ...``.

    The arrays hold final errors of the same trials under different modes,
    so one resampling of trial indices is applied to all of them.
    """
    sq = np.stack([np.asarray(e, dtype=float) ** 2 for e in final_errors])
    counts = bootstrap_counts(sq.shape[1], resamples, seed)
    boot = counts @ sq.T / sq.shape[1]
    return float(np.mean(np.all(np.diff(boot, axis=1) >= 0, axis=1)))
