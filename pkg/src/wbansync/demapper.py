"""Soft increments for the differential observable ``z``.

The soft increment is the posterior mean of ``d`` given a prior and the
observation term ``exp(Re{conj(v) z} / sigma2)``.  Prior LLRs are oriented
per increment component: ``ln P[component > 0] / P[component < 0]``.  Bit
LLRs in the ``ln P[b=1]/P[b=0]`` convention convert through
:meth:`PriorLLRs.from_bit_llrs`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit

from .frame import Modulation
from .mapping import DQPSK_ALPHABET

_R2 = np.sqrt(0.5)

Squash = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PriorLLRs:
    """Component-oriented prior LLRs; DBPSK only uses ``imag``."""

    real: float = 0.0
    imag: float = 0.0

    @classmethod
    def from_bit_llrs(cls, modulation: Modulation, *bit_llrs: float) -> PriorLLRs:
        # DBPSK: b=1 <-> d=-j.  DQPSK: b_2k=1 <-> Im<0, b_2k+1=1 <-> Re<0.
        if modulation is Modulation.DBPSK:
            (lam,) = bit_llrs
            return cls(imag=-lam)
        lam0, lam1 = bit_llrs
        return cls(real=-lam1, imag=-lam0)


UNIFORM = PriorLLRs()


@dataclass(frozen=True)
class SoftIncrement:
    value: complex | np.ndarray
    llrs: tuple
    modulation: Modulation


def saturating_tanh(x, linear_threshold: float = 1.0):
    """Piecewise-linear tanh: ``x`` inside the threshold, ``sign(x)`` outside."""
    if linear_threshold <= 0:
        raise ValueError("linear_threshold must be positive")
    x = np.asarray(x, dtype=float)
    out = np.where(np.abs(x) <= linear_threshold, x, np.sign(x))
    return out[()] if out.ndim == 0 else out


def _check_sigma2(sigma2):
    if np.any(np.asarray(sigma2) <= 0):
        raise ValueError(f"sigma2 must be positive, got {sigma2}")


def soft_increment_dbpsk(z, sigma2, prior: PriorLLRs = UNIFORM,
                         squash: Squash = np.tanh) -> SoftIncrement:
    """``j * tanh(L/2)`` with ``L = prior + 2 Im{z}/sigma2``."""
    _check_sigma2(sigma2)
    llr = prior.imag + 2.0 * np.imag(z) / sigma2
    return SoftIncrement(1j * squash(llr / 2.0), (llr,), Modulation.DBPSK)


def soft_increment_dqpsk(z, sigma2, prior: PriorLLRs = UNIFORM,
                         squash: Squash = np.tanh) -> SoftIncrement:
    """Posterior mean over the four pi/4-DQPSK increments.

    The posterior factorises over the signs of the real and imaginary
    components, each with observation LLR ``sqrt(2) * component / sigma2``.
    """
    _check_sigma2(sigma2)
    llr_re = prior.real + np.sqrt(2.0) * np.real(z) / sigma2
    llr_im = prior.imag + np.sqrt(2.0) * np.imag(z) / sigma2
    value = _R2 * (squash(llr_re / 2.0) + 1j * squash(llr_im / 2.0))
    return SoftIncrement(value, (llr_re, llr_im), Modulation.DQPSK)


def soft_increment(z, sigma2, modulation: Modulation, prior: PriorLLRs = UNIFORM,
                   squash: Squash = np.tanh):
    if modulation is Modulation.DBPSK:
        return soft_increment_dbpsk(z, sigma2, prior, squash).value
    return soft_increment_dqpsk(z, sigma2, prior, squash).value


def increment_prior_probability(bit_llrs: tuple[float, float], v: complex) -> float:
    """``P[d = v]`` for a DQPSK increment from the two bit LLRs ``ln P[b=1]/P[b=0]``.

    Equal to ``exp((2b0-1) l0/2 + (2b1-1) l1/2) / (4 cosh(l0/2) cosh(l1/2))``,
    evaluated as a product of logistic terms so infinite LLRs stay finite.
    """
    b0, b1 = DQPSK_ALPHABET.pattern(v)
    lam0, lam1 = bit_llrs
    return float(expit((2 * b0 - 1) * lam0) * expit((2 * b1 - 1) * lam1))


def posterior_mean_bruteforce(z: complex, sigma2: float, modulation: Modulation,
                              bit_llrs: tuple = ()) -> complex:
    """Explicit sum ``sum_v v P[v | z]`` over the alphabet; a test oracle."""
    if modulation is Modulation.DBPSK:
        lam = bit_llrs[0] if bit_llrs else 0.0
        alphabet = np.array([1j, -1j])
        prior = np.array([expit(-lam), expit(lam)])
    else:
        lams = tuple(bit_llrs) if bit_llrs else (0.0, 0.0)
        alphabet = DQPSK_ALPHABET.increments
        prior = np.array([increment_prior_probability(lams, v) for v in alphabet])
    logw = np.real(np.conj(alphabet) * z) / sigma2
    w = prior * np.exp(logw - logw.max())
    return complex(np.sum(alphabet * w) / np.sum(w))
