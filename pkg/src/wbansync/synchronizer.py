"""Adaptive ML timing loop with data-aided, hard-decision and soft-decision modes."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import partial
from typing import Sequence

import numpy as np

from .demapper import PriorLLRs, UNIFORM, saturating_tanh, soft_increment
from .frame import FrameLayout, Modulation, RegionKind
from .mapping import SymbolStream, hard_increment
from .waveform import MatchedFilterBank, cubic_interpolate


class Mode(str, enum.Enum):
    DA = "DA"
    NDA = "NDA"
    SOFT = "Soft"

    @classmethod
    def parse(cls, value: str | Mode) -> Mode:
        if isinstance(value, Mode):
            return value
        for m in cls:
            if m.value.lower() == str(value).lower():
                return m
        raise ValueError(f"unknown mode {value!r}; expected one of DA, NDA, Soft")


@dataclass(frozen=True)
class LoopConfig:
    mu: float = 0.005
    tau0: float = 0.0
    payload_mode: Mode = Mode.SOFT
    clamp: float = 0.5
    low_complexity_tanh: bool = False
    tanh_threshold: float = 1.0
    prior: PriorLLRs = UNIFORM

    def __post_init__(self):
        object.__setattr__(self, "payload_mode", Mode.parse(self.payload_mode))
        if not 0.0 < self.mu <= 1.0:
            raise ValueError(f"step size mu must lie in (0, 1], got {self.mu}")
        if abs(self.tau0) > self.clamp:
            raise ValueError(f"initial estimate {self.tau0} outside +-{self.clamp}")
        if not 0.0 < self.clamp <= 0.5:
            raise ValueError(f"clamp must lie in (0, 0.5], got {self.clamp}")
        if self.tanh_threshold <= 0:
            raise ValueError("tanh_threshold must be positive")

    def mode_for(self, kind: RegionKind) -> Mode:
        return Mode.DA if kind is RegionKind.PREAMBLE else self.payload_mode

    @property
    def squash(self):
        if self.low_complexity_tanh:
            return partial(saturating_tanh, linear_threshold=self.tanh_threshold)
        return np.tanh


@dataclass(frozen=True)
class TimingTrajectory:
    """Estimates after each processed data symbol.

    ``estimates[n] - estimates[n-1] == mu * errors[n]`` unless ``clamped[n]``;
    ``estimates[-1]`` is taken to be ``initial``.
    """

    initial: float
    estimates: np.ndarray
    errors: np.ndarray
    modes: tuple[Mode, ...]
    clamped: np.ndarray

    def __len__(self):
        return len(self.estimates)

    @property
    def final(self) -> float:
        return float(self.estimates[-1])

    @property
    def clamp_events(self) -> int:
        return int(np.count_nonzero(self.clamped))


def timing_error(d, dz):
    """MLD error ``Re{conj(d) dz}``."""
    return np.real(np.conj(d) * dz)


def step(tau_prev, e, config: LoopConfig):
    """``clamp(tau_prev + mu e)``; returns the new estimate and the clamp flag."""
    raw = tau_prev + config.mu * np.asarray(e)
    new = np.clip(raw, -config.clamp, config.clamp)
    clamped = new != raw
    if np.ndim(new) == 0:
        return float(new), bool(clamped)
    return new, clamped


def _choose_increment(mode: Mode, modulation: Modulation, z, truth, sigma2, config: LoopConfig):
    if mode is Mode.DA:
        return truth
    if mode is Mode.NDA:
        return hard_increment(z, modulation)
    return soft_increment(z, sigma2, modulation, config.prior, config.squash)


def run_loop_batch(banks: Sequence[MatchedFilterBank], layout: FrameLayout,
                   truths: Sequence[SymbolStream], sigma2: float,
                   config: LoopConfig) -> list[TimingTrajectory]:
    """Run independent loops side by side, one per bank.

    Each trial's arithmetic is elementwise, so a batch of one reproduces the
    batched result bit for bit.
    """
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    if len(banks) != len(truths):
        raise ValueError("need one symbol stream per bank")
    n = layout.total_symbols
    for s in truths:
        if len(s) != n:
            raise ValueError(f"stream has {len(s)} data symbols, layout {n}")
    b0 = banks[0]
    if any(b.samples.shape != b0.samples.shape or b.origin != b0.origin or b.sps != b0.sps
           for b in banks):
        raise ValueError("banks in a batch must share geometry")
    last = b0.origin + (n + config.clamp) * b0.sps + 2
    if last >= b0.samples.shape[-1]:
        raise ValueError("matched-filter bank does not cover the layout")

    Y = np.stack([b.samples for b in banks])
    D = np.stack([s.increments for s in truths])
    B = len(banks)
    kinds, mods = layout.symbol_map()
    modes = tuple(config.mode_for(k) for k in kinds)

    tau = np.full(B, float(config.tau0))
    est = np.empty((B, n))
    err = np.empty((B, n))
    clamped = np.zeros((B, n), dtype=bool)
    sps, origin = b0.sps, b0.origin
    for j in range(n):
        # data symbol j is the increment between slots j and j+1
        pos = origin + (np.stack([np.full(B, j), np.full(B, j + 1)], axis=1) + tau[:, None]) * sps
        x, dx = cubic_interpolate(Y, pos)
        dx = dx * sps
        z = x[:, 1] * np.conj(x[:, 0])
        dz = dx[:, 1] * np.conj(x[:, 0]) + x[:, 1] * np.conj(dx[:, 0])
        d = _choose_increment(modes[j], mods[j], z, D[:, j], sigma2, config)
        e = timing_error(d, dz)
        tau, c = step(tau, e, config)
        est[:, j], err[:, j], clamped[:, j] = tau, e, c

    return [TimingTrajectory(float(config.tau0), est[b], err[b], modes, clamped[b])
            for b in range(B)]


def run_loop(bank: MatchedFilterBank, layout: FrameLayout, truth: SymbolStream,
             sigma2: float, config: LoopConfig) -> TimingTrajectory:
    """Preamble symbols use the known increments; the rest use ``config.payload_mode``."""
    return run_loop_batch([bank], layout, [truth], sigma2, config)[0]


def s_curve(banks: MatchedFilterBank | Sequence[MatchedFilterBank], layout: FrameLayout,
            truths: SymbolStream | Sequence[SymbolStream], u_grid, mode: Mode | str,
            sigma2: float, config: LoopConfig | None = None) -> np.ndarray:
    """Mean detector output at fixed timing hypotheses.

    ``mode`` applies to every symbol of the frame.  The curve is a restoring
    force: positive for ``u`` below the true delay, negative above.
    """
    if isinstance(banks, MatchedFilterBank):
        banks, truths = [banks], [truths]
    mode = Mode.parse(mode)
    config = config or LoopConfig()
    _, mods = layout.symbol_map()
    n = layout.total_symbols
    u_grid = np.atleast_1d(np.asarray(u_grid, dtype=float))
    out = np.zeros(len(u_grid))
    is_bpsk = np.array([m is Modulation.DBPSK for m in mods])
    for bank, truth in zip(banks, truths):
        for i, u in enumerate(u_grid):
            x, dx = cubic_interpolate(bank.samples, bank.position(np.arange(n + 1), u))
            dx = dx * bank.sps
            z = x[1:] * np.conj(x[:-1])
            dz = dx[1:] * np.conj(x[:-1]) + x[1:] * np.conj(dx[:-1])
            d = np.where(
                is_bpsk,
                _choose_increment(mode, Modulation.DBPSK, z, truth.increments, sigma2, config),
                _choose_increment(mode, Modulation.DQPSK, z, truth.increments, sigma2, config),
            )
            out[i] += np.mean(timing_error(d, dz))
    return out / len(banks)
