"""BPSK modulation, AWGN sampling, LLR demapping, and SNR conversions.

Bit 0 maps to +1 so the all-zero codeword is the all-plus-one sequence and
all-zero-based analysis lines up with simulation.  Gaussian noise comes from
numpy's ziggurat sampler on a PCG64 stream; the identifiers are recorded in
run metadata for replay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .jfun import jfun
from .llr import LLR_CLIP

#: Identifier of the noise-sampling scheme, recorded in run metadata.
NOISE_ALGORITHM = "ziggurat/pcg64"


def ebn0_to_sigma(ebn0_db: float, rate: float) -> float:
    """Noise standard deviation for a given Eb/N0 (dB) and code rate."""
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must lie in (0, 1], got {rate}")
    return 1.0 / math.sqrt(2.0 * rate * 10.0 ** (ebn0_db / 10.0))


def sigma_to_ebn0(sigma: float, rate: float) -> float:
    """Inverse of :func:`ebn0_to_sigma`."""
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must lie in (0, 1], got {rate}")
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return 10.0 * math.log10(1.0 / (2.0 * rate * sigma * sigma))


@dataclass(frozen=True)
class ChannelParams:
    """Mutually consistent view of one operating point."""

    ebn0_db: float
    rate: float
    sigma: float
    es_n0: float

    @classmethod
    def from_ebn0(cls, ebn0_db: float, rate: float) -> "ChannelParams":
        sigma = ebn0_to_sigma(ebn0_db, rate)
        return cls(ebn0_db, rate, sigma, rate * 10.0 ** (ebn0_db / 10.0))

    @classmethod
    def from_sigma(cls, sigma: float, rate: float) -> "ChannelParams":
        ebn0_db = sigma_to_ebn0(sigma, rate)
        return cls(ebn0_db, rate, sigma, rate * 10.0 ** (ebn0_db / 10.0))


def transmit(bits: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """BPSK-modulate bits (0 -> +1) and add white Gaussian noise."""
    if sigma < 0.0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    bits = np.asarray(bits)
    symbols = 1.0 - 2.0 * bits.astype(float)
    if sigma == 0.0:
        return symbols
    return symbols + sigma * rng.standard_normal(bits.shape)


def llr_demap(y: np.ndarray, sigma: float, clip: float = LLR_CLIP) -> np.ndarray:
    """Channel LLRs 2*y/sigma^2, clipped; sigma == 0 saturates by sign."""
    y = np.asarray(y, dtype=float)
    if sigma == 0.0:
        return np.where(y >= 0.0, clip, -clip)
    return np.clip(2.0 * y / (sigma * sigma), -clip, clip)


def channel_mi(ebn0_db: float, rate: float) -> float:
    """Mutual information of the BPSK-AWGN channel LLR at this operating point.

    Equals J(sqrt(8 * rate * Eb/N0)); the channel LLR is a consistent
    Gaussian with variance 8 * rate * Eb/N0.
    """
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must lie in (0, 1], got {rate}")
    return jfun(math.sqrt(8.0 * rate * 10.0 ** (ebn0_db / 10.0)))


def bpsk_capacity_ebn0_db(rate: float, tol_db: float = 1e-6) -> float:
    """Smallest Eb/N0 (dB) at which BPSK-AWGN capacity reaches ``rate``.

    Solves channel_mi(ebn0, rate) == rate by bisection; the constrained
    capacity equals the channel MI under the consistent-Gaussian LLR model.
    """
    if not 0.0 < rate < 1.0:
        raise ValueError(f"rate must lie in (0, 1), got {rate}")
    lo, hi = -20.0, 40.0
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if channel_mi(mid, rate) < rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
