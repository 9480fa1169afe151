"""BPSK modulation and the two-way relay channel's uplink/downlink models.

Noise conventions used throughout the package: every sigma2 parameter is the
*total* power of the circularly symmetric complex Gaussian noise (sigma2/2
per real dimension), and likelihoods use the matched exponent
|r - c|^2 / sigma2. The experiment SNR axis counts signal power against the
per-dimension noise variance, i.e. snr_db maps to a total noise power of
2 * 10**(-snr_db/10); unit-gain BPSK at 0 dB therefore sees total noise
power 2. This is the axis on which the reference curves and sweeps are
reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelRealization:
    """Uplink coefficients and noise variance, fixed for one packet."""

    h13: complex
    h23: complex
    sigma2: float
    h31: complex | None = None
    h32: complex | None = None

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")


@dataclass(frozen=True)
class CoeffDist:
    """Distribution of a single complex channel coefficient."""

    kind: str  # "fixed" | "rayleigh"
    value: complex = 1 + 0j
    variance: float = 1.0

    @classmethod
    def fixed(cls, value):
        return cls(kind="fixed", value=complex(value))

    @classmethod
    def rayleigh(cls, variance):
        if not variance > 0:
            raise ValueError("rayleigh variance must be positive")
        return cls(kind="rayleigh", variance=float(variance))


def sigma2_from_snr_db(snr_db: float) -> float:
    """Total complex noise power at a given SNR (per-dimension axis)."""
    return 2.0 * 10.0 ** (-snr_db / 10.0)


def snr_db_from_sigma2(sigma2: float) -> float:
    """Inverse of sigma2_from_snr_db."""
    return -10.0 * np.log10(sigma2 / 2.0)


def modulate_bpsk(x: np.ndarray) -> np.ndarray:
    """Map coded bits {0,1} to bipolar symbols: a = 1 - 2x."""
    return 1.0 - 2.0 * np.asarray(x, dtype=np.float64)


def sample_channel(dist: CoeffDist, rng: np.random.Generator) -> complex:
    """Draw one coefficient: the fixed constant, or a circularly symmetric
    complex Gaussian whose magnitude is Rayleigh with E|h|^2 = variance."""
    if dist.kind == "fixed":
        return dist.value
    if dist.kind == "rayleigh":
        scale = np.sqrt(dist.variance / 2.0)
        return complex(rng.normal(scale=scale), rng.normal(scale=scale))
    raise ValueError(f"unknown coefficient distribution {dist.kind!r}")


def complex_awgn(shape, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    scale = np.sqrt(sigma2 / 2.0)
    return rng.normal(scale=scale, size=shape) + 1j * rng.normal(scale=scale, size=shape)


def uplink_superpose(a1, a2, ch: ChannelRealization, rng: np.random.Generator) -> np.ndarray:
    """Received packet at the relay: r = h13*a1 + h23*a2 + w."""
    a1 = np.asarray(a1)
    a2 = np.asarray(a2)
    if a1.shape != a2.shape:
        raise ValueError("uplink packets must have equal length")
    return ch.h13 * a1 + ch.h23 * a2 + complex_awgn(a1.shape, ch.sigma2, rng)


def downlink(x3, h: complex, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Broadcast hop: y = h*x3 + w, same noise convention as the uplink."""
    x3 = np.asarray(x3)
    if sigma2 == 0:
        return h * x3
    return h * x3 + complex_awgn(x3.shape, sigma2, rng)


def cancel_self_interference(y, known) -> np.ndarray:
    """Subtract the caller-supplied self-component from a received packet."""
    y = np.asarray(y)
    known = np.asarray(known)
    if y.shape != known.shape:
        raise ValueError("self-interference vector length mismatch")
    return y - known
