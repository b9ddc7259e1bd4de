"""Differential pi/2-DBPSK and pi/4-DQPSK mapping and hard demapping.

Symbols follow ``a_k = a_{k-1} * d_k`` from the reference ``a_0 = j``.  The
reference symbol is transmitted ahead of the data, so a frame of ``N`` data
symbols occupies ``N + 1`` symbol slots and every data symbol ``n`` is
carried by the increment between slots ``n`` and ``n + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frame import FrameBits, FrameLayout, Modulation, RegionKind

A0 = 1j
_R2 = np.sqrt(0.5)


@dataclass(frozen=True)
class IncrementAlphabet:
    modulation: Modulation
    patterns: tuple[tuple[int, ...], ...]
    phases: tuple[float, ...]

    @property
    def increments(self) -> np.ndarray:
        return np.exp(1j * np.asarray(self.phases))

    def increment(self, pattern) -> complex:
        return complex(self.increments[self.patterns.index(tuple(int(b) for b in pattern))])

    def pattern(self, increment: complex, atol: float = 1e-9) -> tuple[int, ...]:
        dist = np.abs(self.increments - increment)
        i = int(np.argmin(dist))
        if dist[i] > atol:
            raise ValueError(f"{increment} is not a {self.modulation.value} increment")
        return self.patterns[i]


DBPSK_ALPHABET = IncrementAlphabet(Modulation.DBPSK, ((0,), (1,)), (np.pi / 2, -np.pi / 2))
DQPSK_ALPHABET = IncrementAlphabet(
    Modulation.DQPSK,
    ((0, 0), (0, 1), (1, 0), (1, 1)),
    (np.pi / 4, 3 * np.pi / 4, 7 * np.pi / 4, 5 * np.pi / 4),
)
ALPHABETS = {Modulation.DBPSK: DBPSK_ALPHABET, Modulation.DQPSK: DQPSK_ALPHABET}


@dataclass(frozen=True)
class SymbolStream:
    """Transmitted symbols ``a_0..a_N`` and data increments ``d_1..d_N``.

    ``increments[n]`` is the increment of data symbol ``n`` (slot ``n + 1``).
    """

    symbols: np.ndarray
    increments: np.ndarray
    source_bits: FrameBits
    a0: complex = A0

    def __len__(self):
        return len(self.increments)


def _region_bits(bits: FrameBits, kind: RegionKind) -> np.ndarray:
    return {
        RegionKind.PREAMBLE: bits.preamble_bits,
        RegionKind.PLCP_HEADER: bits.header_bits,
        RegionKind.PSDU: bits.psdu_bits,
    }[kind]


def increments_from_bits(bits: np.ndarray, modulation: Modulation) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    if modulation is Modulation.DBPSK:
        return np.where(bits == 0, 1j, -1j)
    if len(bits) % 2:
        raise ValueError("DQPSK needs an even number of bits")
    b0, b1 = bits[0::2], bits[1::2]
    # alphabet order: 00, 01, 10, 11
    return DQPSK_ALPHABET.increments[2 * b0 + b1]


def map_stream(bits: FrameBits, layout: FrameLayout, a0: complex = A0) -> SymbolStream:
    incs = []
    for r in layout.regions:
        rb = _region_bits(bits, r.kind)
        expected = r.symbols * r.modulation.bits_per_symbol
        if len(rb) != expected:
            raise ValueError(
                f"{r.kind.value}: {len(rb)} bits for {r.symbols} {r.modulation.value} symbols "
                f"(expected {expected})")
        incs.append(increments_from_bits(rb, r.modulation))
    for kind in RegionKind:
        if layout.region(kind) is None and len(_region_bits(bits, kind)):
            raise ValueError(f"bits supplied for {kind.value}, which the layout does not contain")

    d = np.concatenate(incs)
    # running product drifts off the unit circle by ~1e-16 per step
    a = a0 * np.cumprod(np.concatenate([[1.0 + 0j], d]))
    return SymbolStream(symbols=a, increments=d, source_bits=bits, a0=a0)


def hard_demap_dbpsk(z):
    """Decision ``j*sign(Im z)``; ``Im z == 0`` resolves to ``+j``.

    Returns ``(bits, increments)``; vectorised over ``z``.
    """
    z = np.asarray(z)
    pos = z.imag >= 0
    d = np.where(pos, 1j, -1j)
    bits = np.where(pos, 0, 1)
    if d.ndim == 0:
        return int(bits), complex(d)
    return bits, d


def hard_demap_dqpsk(z):
    """Nearest increment in angle; exact ties go to the smallest phase in [0, 2pi).

    Returns ``(bit pairs, increments)``; vectorised over ``z``.
    """
    z = np.asarray(z)
    re_pos = (z.real > 0) | ((z.real == 0) & (z.imag >= 0))
    im_pos = z.imag >= 0
    d = (np.where(re_pos, 1.0, -1.0) + 1j * np.where(im_pos, 1.0, -1.0)) * _R2
    # b_2k = 1 <-> Im < 0, b_2k+1 = 1 <-> Re < 0
    b0 = np.where(im_pos, 0, 1)
    b1 = np.where(re_pos, 0, 1)
    if d.ndim == 0:
        return (int(b0), int(b1)), complex(d)
    return np.stack([b0, b1], axis=-1), d


def hard_increment(z, modulation: Modulation):
    if modulation is Modulation.DBPSK:
        return hard_demap_dbpsk(z)[1]
    return hard_demap_dqpsk(z)[1]
