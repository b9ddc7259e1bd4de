"""Data-aided Cramer-Rao bound for normalised timing error."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .waveform import xi_closed_form, xi_numerical


@lru_cache(maxsize=64)
def _validated_xi(rolloff: float) -> float:
    xi = xi_closed_form(rolloff)
    ref = xi_numerical(rolloff)
    if abs(xi - ref) > 1e-4 * ref:
        raise RuntimeError(f"spectral moment closed form {xi} disagrees with quadrature {ref}")
    return xi


def crb_reference(snr_db, block_len: int, rolloff: float = 0.3):
    """``1 / (8 pi^2 xi L Es/N0)`` for ``L`` known symbols.

    ``xi`` is checked against quadrature of the raised-cosine spectrum once
    per roll-off before use.
    """
    if block_len < 1:
        raise ValueError(f"block length must be >= 1, got {block_len}")
    xi = _validated_xi(float(rolloff))
    es_n0 = 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)
    out = 1.0 / (8.0 * np.pi**2 * xi * block_len * es_n0)
    return float(out) if np.ndim(out) == 0 else out
