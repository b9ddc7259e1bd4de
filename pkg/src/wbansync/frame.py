"""PPDU layout and bit content for the narrowband 802.15.6 frame.

The standard frame is 90 preamble symbols (DBPSK), 31 PLCP header symbols
(DBPSK) and 80 PSDU symbols (DQPSK).  The preamble is a 63-chip m-sequence
followed by a fixed extension; header and PSDU content is random payload.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class RegionKind(str, enum.Enum):
    PREAMBLE = "Preamble"
    PLCP_HEADER = "PlcpHeader"
    PSDU = "Psdu"


class Modulation(str, enum.Enum):
    DBPSK = "DBPSK"
    DQPSK = "DQPSK"

    @property
    def bits_per_symbol(self) -> int:
        return 1 if self is Modulation.DBPSK else 2


@dataclass(frozen=True)
class Region:
    kind: RegionKind
    symbols: int
    modulation: Modulation


_KIND_ORDER = (RegionKind.PREAMBLE, RegionKind.PLCP_HEADER, RegionKind.PSDU)


@dataclass(frozen=True)
class FrameLayout:
    """Ordered, contiguous frame regions indexed by 0-based data symbol."""

    regions: tuple[Region, ...]

    def __post_init__(self):
        if not self.regions:
            raise ValueError("layout needs at least one region")
        seen = []
        for r in self.regions:
            if r.symbols <= 0:
                raise ValueError(f"region {r.kind.value} has non-positive symbol count {r.symbols}")
            if r.kind in seen:
                raise ValueError(f"duplicate region {r.kind.value}")
            seen.append(r.kind)
        order = [_KIND_ORDER.index(k) for k in seen]
        if order != sorted(order):
            raise ValueError("regions must follow preamble, header, PSDU transmission order")

    @classmethod
    def standard(cls) -> FrameLayout:
        return cls((
            Region(RegionKind.PREAMBLE, 90, Modulation.DBPSK),
            Region(RegionKind.PLCP_HEADER, 31, Modulation.DBPSK),
            Region(RegionKind.PSDU, 80, Modulation.DQPSK),
        ))

    @classmethod
    def block(cls, symbols: int, modulation: Modulation | str,
              preamble_symbols: int = 0) -> FrameLayout:
        """Optional DBPSK preamble followed by a single payload block."""
        regions = []
        if preamble_symbols:
            regions.append(Region(RegionKind.PREAMBLE, preamble_symbols, Modulation.DBPSK))
        regions.append(Region(RegionKind.PSDU, symbols, Modulation(modulation)))
        return cls(tuple(regions))

    @property
    def total_symbols(self) -> int:
        return sum(r.symbols for r in self.regions)

    def region(self, kind: RegionKind) -> Region | None:
        for r in self.regions:
            if r.kind is kind:
                return r
        return None

    def count(self, kind: RegionKind) -> int:
        r = self.region(kind)
        return 0 if r is None else r.symbols

    def bounds(self) -> list[tuple[int, int, Region]]:
        """``(start, stop, region)`` for every region, stop exclusive."""
        out, start = [], 0
        for r in self.regions:
            out.append((start, start + r.symbols, r))
            start += r.symbols
        return out

    def symbol_map(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-symbol arrays of region kinds and modulations."""
        kinds = np.empty(self.total_symbols, dtype=object)
        mods = np.empty(self.total_symbols, dtype=object)
        for start, stop, r in self.bounds():
            kinds[start:stop] = r.kind
            mods[start:stop] = r.modulation
        return kinds, mods


def region_of(symbol_index: int, layout: FrameLayout) -> tuple[RegionKind, Modulation]:
    if not 0 <= symbol_index < layout.total_symbols:
        raise IndexError(f"symbol index {symbol_index} outside [0, {layout.total_symbols})")
    for start, stop, r in layout.bounds():
        if start <= symbol_index < stop:
            return r.kind, r.modulation
    raise AssertionError("unreachable")


# x^6 + x + 1
DEFAULT_POLY = 0b1000011
DEFAULT_DEGREE = 6
DEFAULT_SEED = 0b111111
# 25 printed bits padded with "01" up to the stated 27
DEFAULT_EXTENSION = "0101010101101101101101101" + "01"


def generate_m_sequence(degree: int = DEFAULT_DEGREE, taps: int = DEFAULT_POLY,
                        seed: int = DEFAULT_SEED) -> np.ndarray:
    """One period of a Fibonacci LFSR sequence.

    ``taps`` is the feedback polynomial as a bit mask including the
    ``x**degree`` and constant terms, e.g. ``0b1000011`` for x^6 + x + 1.
    Bit ``i`` of ``seed`` is the initial register cell ``s_i``; the output is
    ``s_0, s_1, ...`` with ``s_{k+n} = sum_i c_i s_{k+i} (mod 2)``.
    """
    if degree < 2:
        raise ValueError(f"degree must be >= 2, got {degree}")
    if taps >> degree != 1 or not taps & 1:
        raise ValueError(f"taps {taps:#b} is not a degree-{degree} polynomial with constant term")
    seed &= (1 << degree) - 1
    if seed == 0:
        raise ValueError("all-zero LFSR seed is absorbing")

    n = (1 << degree) - 1
    coeffs = [(taps >> i) & 1 for i in range(degree)]
    reg = [(seed >> i) & 1 for i in range(degree)]
    out = np.empty(n, dtype=np.int8)
    for k in range(n):
        out[k] = reg[0]
        fb = 0
        for c, s in zip(coeffs, reg):
            fb ^= c & s
        reg = reg[1:] + [fb]
    if reg != [(seed >> i) & 1 for i in range(degree)] or _has_shorter_period(out):
        raise ValueError(f"taps {taps:#b} is not primitive: period is shorter than {n}")
    return out


def _has_shorter_period(seq: np.ndarray) -> bool:
    n = len(seq)
    return any(n % p == 0 and np.array_equal(seq, np.roll(seq, p)) for p in range(1, n))


def parse_bits(bits: str | np.ndarray | list) -> np.ndarray:
    if isinstance(bits, str):
        if set(bits) - {"0", "1"}:
            raise ValueError(f"bit string may only contain 0/1: {bits!r}")
        return np.array([int(c) for c in bits], dtype=np.int8)
    arr = np.asarray(bits, dtype=np.int8)
    if np.any((arr != 0) & (arr != 1)):
        raise ValueError("bits must be 0 or 1")
    return arr


@dataclass(frozen=True)
class FrameBits:
    preamble_bits: np.ndarray
    header_bits: np.ndarray
    psdu_bits: np.ndarray

    def concatenated(self) -> np.ndarray:
        return np.concatenate([self.preamble_bits, self.header_bits, self.psdu_bits])

    def __eq__(self, other):
        if not isinstance(other, FrameBits):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(
            (self.preamble_bits, self.header_bits, self.psdu_bits),
            (other.preamble_bits, other.header_bits, other.psdu_bits)))


def build_preamble(extension: str | np.ndarray = DEFAULT_EXTENSION, degree: int = DEFAULT_DEGREE,
                   taps: int = DEFAULT_POLY, seed: int = DEFAULT_SEED) -> np.ndarray:
    return np.concatenate([generate_m_sequence(degree, taps, seed), parse_bits(extension)])


def build_frame_bits(layout: FrameLayout, payload_seed,
                     preamble_extension: str | np.ndarray = DEFAULT_EXTENSION,
                     preamble: np.ndarray | None = None) -> FrameBits:
    """Bit content for ``layout``.

    ``preamble`` may be passed precomputed (it never depends on the payload
    seed); otherwise it is the default m-sequence followed by the extension.
    Header bits are drawn before PSDU bits from the same generator.
    """
    pre_region = layout.region(RegionKind.PREAMBLE)
    n_pre = 0 if pre_region is None else pre_region.symbols * pre_region.modulation.bits_per_symbol
    if n_pre:
        if preamble is None:
            preamble = build_preamble(preamble_extension)
        if len(preamble) != n_pre:
            raise ValueError(
                f"preamble has {len(preamble)} bits but the layout expects {n_pre} "
                f"(m-sequence + extension must equal the preamble symbol count)")
    else:
        preamble = np.zeros(0, dtype=np.int8)

    rng = np.random.default_rng(payload_seed)

    def draw(kind):
        r = layout.region(kind)
        n = 0 if r is None else r.symbols * r.modulation.bits_per_symbol
        return rng.integers(0, 2, size=n, dtype=np.int8)

    header = draw(RegionKind.PLCP_HEADER)
    psdu = draw(RegionKind.PSDU)
    return FrameBits(np.asarray(preamble, dtype=np.int8), header, psdu)
