"""Pulse shaping, delayed AWGN channel, matched filter and timing interpolation.

Time is measured in symbol periods throughout (T = 1).  The channel delay is
applied by evaluating the analytic SRRC pulse at the shifted instants, so the
only interpolation error in the chain is the receiver's own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import integrate

from .mapping import SymbolStream


def srrc(t, rolloff: float) -> np.ndarray:
    """Unnormalised square-root raised cosine, T = 1, with analytic limits."""
    t = np.asarray(t, dtype=float)
    a = float(rolloff)
    h = np.empty_like(t)

    at_zero = np.abs(t) < 1e-12
    h[at_zero] = 1.0 - a + 4.0 * a / np.pi

    if a > 0:
        at_sing = np.abs(np.abs(t) - 1.0 / (4.0 * a)) < 1e-12
        x = np.pi / (4.0 * a)
        h[at_sing] = a / np.sqrt(2.0) * ((1 + 2 / np.pi) * np.sin(x) + (1 - 2 / np.pi) * np.cos(x))
    else:
        at_sing = np.zeros_like(at_zero)

    rest = ~(at_zero | at_sing)
    tr = t[rest]
    num = np.sin(np.pi * tr * (1 - a)) + 4 * a * tr * np.cos(np.pi * tr * (1 + a))
    den = np.pi * tr * (1 - (4 * a * tr) ** 2)
    h[rest] = num / den
    return h


@dataclass(frozen=True)
class PulseShape:
    rolloff: float
    span: int
    sps: int
    taps: np.ndarray
    scale: float

    @property
    def half_length(self) -> int:
        return self.span * self.sps

    def evaluate(self, t) -> np.ndarray:
        """Normalised, truncated pulse at arbitrary instants (symbol periods)."""
        t = np.asarray(t, dtype=float)
        inside = np.abs(t) <= self.span + 1e-12
        return np.where(inside, self.scale * srrc(t, self.rolloff), 0.0)


def srrc_taps(rolloff: float = 0.3, span: int = 8, sps: int = 8) -> PulseShape:
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError(f"rolloff must lie in [0, 1], got {rolloff}")
    if span < 4:
        raise ValueError(f"span must be >= 4 symbols, got {span}")
    if sps < 4 or sps % 2:
        raise ValueError(f"sps must be an even integer >= 4, got {sps}")
    n = np.arange(-span * sps, span * sps + 1)
    raw = srrc(n / sps, rolloff)
    scale = 1.0 / np.sqrt(np.sum(raw**2))
    return PulseShape(float(rolloff), int(span), int(sps), raw * scale, float(scale))


def xi_closed_form(rolloff: float) -> float:
    """Normalised second spectral moment of the SRRC, T**2 * int f^2|H|^2 / int |H|^2."""
    return 1.0 / 12.0 + rolloff**2 * (0.25 - 2.0 / np.pi**2)


def _rc_spectrum(f: float, a: float) -> float:
    f = abs(f)
    lo, hi = (1 - a) / 2, (1 + a) / 2
    if f <= lo:
        return 1.0
    if f <= hi:
        return 0.5 * (1.0 + math.cos(math.pi / a * (f - lo)))
    return 0.0


def xi_numerical(rolloff: float) -> float:
    """Quadrature of the raised-cosine power spectrum |H(f)|^2."""
    a = float(rolloff)
    edges = sorted({-(1 + a) / 2, -(1 - a) / 2, (1 - a) / 2, (1 + a) / 2})
    num = integrate.quad(lambda f: f * f * _rc_spectrum(f, a), -1, 1, points=edges, epsabs=1e-13)[0]
    den = integrate.quad(lambda f: _rc_spectrum(f, a), -1, 1, points=edges, epsabs=1e-13)[0]
    return num / den


def xi_from_taps(pulse: PulseShape, nfft: int = 1 << 16) -> float:
    """Spectral moment of the truncated taps via a zero-padded DFT."""
    H = np.fft.fft(pulse.taps, nfft)
    f = np.fft.fftfreq(nfft) * pulse.sps
    p = np.abs(H) ** 2
    return float(np.sum(f * f * p) / np.sum(p))


@dataclass(frozen=True)
class ReceivedSignal:
    """Samples at ``sps`` per symbol; slot ``k`` sits at index ``origin + k*sps`` for zero delay."""

    samples: np.ndarray
    sps: int
    origin: int
    true_delay: float
    noise_sigma2: float = 0.0
    es_n0_db: float = math.inf


def noise_sigma2(es_n0_db: float) -> float:
    """Per-component matched-filter output noise variance, N0/2 with Es = 1."""
    if math.isinf(es_n0_db) and es_n0_db > 0:
        return 0.0
    return 1.0 / (2.0 * 10.0 ** (es_n0_db / 10.0))


def shape(stream: SymbolStream | np.ndarray, pulse: PulseShape, tau: float) -> ReceivedSignal:
    """Noise-free ``sum_i a_i h(t - i - tau)`` sampled at ``sps`` per symbol."""
    if abs(tau) > 0.5:
        raise ValueError(f"delay must satisfy |tau| <= 0.5, got {tau}")
    symbols = stream.symbols if isinstance(stream, SymbolStream) else np.asarray(stream, complex)
    sps = pulse.sps
    # one extra symbol of guard on each side keeps the shifted pulse support in range
    J = (pulse.span + 1) * sps
    kernel = pulse.evaluate((np.arange(2 * J + 1) - J) / sps - tau)
    up = np.zeros((len(symbols) - 1) * sps + 1, dtype=complex)
    up[::sps] = symbols
    return ReceivedSignal(np.convolve(up, kernel), sps=sps, origin=J, true_delay=float(tau))


def add_noise(signal: ReceivedSignal, es_n0_db: float, seed) -> ReceivedSignal:
    """Circular white Gaussian noise, per-component variance N0/2 per sample.

    With unit-energy taps the matched filter passes that variance unchanged.
    """
    if math.isnan(es_n0_db) or es_n0_db == -math.inf:
        raise ValueError(f"Es/N0 must be finite or +inf, got {es_n0_db}")
    s2 = noise_sigma2(es_n0_db)
    if s2 == 0.0:
        return replace(signal, noise_sigma2=0.0, es_n0_db=math.inf)
    rng = np.random.default_rng(seed)
    n = signal.samples.shape[-1]
    noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return replace(signal, samples=signal.samples + np.sqrt(s2) * noise,
                   noise_sigma2=s2, es_n0_db=float(es_n0_db))


@dataclass(frozen=True)
class MatchedFilterBank:
    """Matched-filter output; ``x_k(u)`` lives at fractional index ``origin + (k + u)*sps``."""

    samples: np.ndarray
    sps: int
    origin: int
    noise_sigma2: float = 0.0

    def position(self, k, u) -> np.ndarray:
        return self.origin + (np.asarray(k) + np.asarray(u)) * self.sps


def matched_filter(received: ReceivedSignal, pulse: PulseShape) -> MatchedFilterBank:
    if received.sps != pulse.sps:
        raise ValueError(f"signal has {received.sps} samples/symbol, pulse {pulse.sps}")
    y = np.convolve(received.samples, pulse.taps)
    return MatchedFilterBank(y, sps=pulse.sps, origin=received.origin + pulse.half_length,
                             noise_sigma2=received.noise_sigma2)


def cubic_interpolate(samples: np.ndarray, pos) -> tuple[np.ndarray, np.ndarray]:
    """4-point Lagrange interpolation at fractional sample index ``pos``.

    Uses nodes ``i-1..i+2`` around ``i = floor(pos)``.  Returns the value and
    its derivative with respect to the sample index.  ``samples`` may be 1-D
    or a 2-D batch whose leading axis matches that of ``pos``.
    """
    pos = np.asarray(pos, dtype=float)
    i = np.floor(pos).astype(np.int64)
    m = pos - i
    n = samples.shape[-1]
    if np.any(i - 1 < 0) or np.any(i + 2 >= n):
        raise IndexError(f"fractional index outside interpolable range [1, {n - 2})")

    if samples.ndim == 1:
        y = [samples[i + j] for j in (-1, 0, 1, 2)]
    else:
        idx = i.reshape(i.shape[0], -1)
        y = [np.take_along_axis(samples, idx + j, axis=-1).reshape(i.shape) for j in (-1, 0, 1, 2)]

    mp1, mm1, mm2 = m + 1.0, m - 1.0, m - 2.0
    value = (-(m * mm1 * mm2) / 6.0 * y[0] + (mp1 * mm1 * mm2) / 2.0 * y[1]
             - (mp1 * m * mm2) / 2.0 * y[2] + (mp1 * m * mm1) / 6.0 * y[3])
    m2 = m * m
    deriv = (-(3 * m2 - 6 * m + 2) / 6.0 * y[0] + (3 * m2 - 4 * m - 1) / 2.0 * y[1]
             - (3 * m2 - 2 * m - 2) / 2.0 * y[2] + (3 * m2 - 1) / 6.0 * y[3])
    return value, deriv


def sample_at(bank: MatchedFilterBank, k, u):
    """Matched-filter output ``x_k(u)`` (vectorised over ``k`` and ``u``)."""
    value, _ = cubic_interpolate(bank.samples, bank.position(k, u))
    return value[()] if np.ndim(value) == 0 else value


def sample_and_derivative(bank: MatchedFilterBank, k, u):
    """``x_k(u)`` and ``dx_k/du`` in per-symbol-period units."""
    value, deriv = cubic_interpolate(bank.samples, bank.position(k, u))
    return value, deriv * bank.sps


def differential_observable(bank: MatchedFilterBank, k, u):
    """``z_k(u) = x_k(u) * conj(x_{k-1}(u))`` for slot ``k >= 1``."""
    if np.any(np.asarray(k) < 1):
        raise ValueError("z_k needs a predecessor: k must be >= 1")
    k = np.asarray(k)
    return sample_at(bank, k, u) * np.conj(sample_at(bank, k - 1, u))


def observable_derivative(bank: MatchedFilterBank, k, u):
    """``dz_k/du`` from the analytic derivative of the interpolator."""
    if np.any(np.asarray(k) < 1):
        raise ValueError("z_k needs a predecessor: k must be >= 1")
    k = np.asarray(k)
    x1, dx1 = sample_and_derivative(bank, k, u)
    x0, dx0 = sample_and_derivative(bank, k - 1, u)
    return dx1 * np.conj(x0) + x1 * np.conj(dx0)


@lru_cache(maxsize=32)
def cached_pulse(rolloff: float, span: int, sps: int) -> PulseShape:
    return srrc_taps(rolloff, span, sps)
