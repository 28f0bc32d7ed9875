"""QPSK OFDM baseband: symbol mapping, oversampled IDFT and PAPR.

Frequency blocks and time signals are plain complex numpy arrays. A block of
``N`` subcarriers becomes a signal of ``L * N`` samples.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InputSizeError, PreconditionError

# Gray map, indexed by 2*b0 + b1: 00, 01, 10, 11
_QPSK_TABLE = np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j]) / np.sqrt(2)


@dataclass(frozen=True)
class PaprValue:
    """Peak-to-average power ratio, linear and in dB."""

    ratio: float

    @property
    def db(self) -> float:
        return 10.0 * np.log10(self.ratio)

    def __float__(self):
        return self.ratio


def modulate_qpsk(bits, n_subcarriers=None) -> np.ndarray:
    """Map a bit sequence of length 2N onto N Gray-coded unit-power QPSK symbols.

    Bit pairs map as 00 -> (1+j)/sqrt2, 01 -> (-1+j)/sqrt2,
    11 -> (-1-j)/sqrt2, 10 -> (1-j)/sqrt2.
    """
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size % 2:
        raise InputSizeError(f"expected an even-length 1-D bit sequence, got shape {bits.shape}")
    if n_subcarriers is not None and bits.size != 2 * n_subcarriers:
        raise InputSizeError(f"expected {2 * n_subcarriers} bits, got {bits.size}")
    if np.any((bits != 0) & (bits != 1)):
        raise PreconditionError("bits must be 0 or 1")
    pairs = bits.astype(np.intp).reshape(-1, 2)
    return _QPSK_TABLE[2 * pairs[:, 0] + pairs[:, 1]]


def random_qpsk_block(n_subcarriers, rng) -> np.ndarray:
    """Draw 2N uniform bits from ``rng`` and modulate them."""
    bits = rng.integers(0, 2, size=2 * n_subcarriers)
    return modulate_qpsk(bits)


def idft_oversampled(block, oversampling=4) -> np.ndarray:
    """L-times oversampled baseband signal of a frequency block.

    x(k) = 1/sqrt(N) * sum_n X_n exp(j 2 pi n k / (L N)), k = 0 .. LN-1.

    The block occupies bins 0..N-1 of an LN-point inverse transform, with the
    (L-1)N trailing bins zero. Works along the last axis, so a stack of
    blocks of shape (..., N) gives signals of shape (..., L*N).
    """
    block = np.asarray(block, dtype=complex)
    n = block.shape[-1]
    if oversampling < 1 or n < 1:
        raise PreconditionError("need N >= 1 and L >= 1")
    size = oversampling * n
    # numpy's ifft carries 1/(LN); rescale to 1/sqrt(N)
    return np.fft.ifft(block, n=size, axis=-1) * (size / np.sqrt(n))


def papr_ratio(signal) -> np.ndarray:
    """Linear PAPR along the last axis (vectorised, no checks)."""
    power = signal.real**2 + signal.imag**2
    return power.max(axis=-1) / power.mean(axis=-1)


def papr(signal) -> PaprValue:
    """Max instantaneous power over the time-averaged power of one signal."""
    signal = np.asarray(signal, dtype=complex)
    if signal.ndim != 1 or signal.size == 0:
        raise InputSizeError("papr expects a non-empty 1-D signal")
    power = np.abs(signal) ** 2
    mean = power.mean()
    if not mean > 0:
        raise DegenerateInputError("signal has zero average power")
    return PaprValue(float(power.max() / mean))


def to_db(ratio):
    return 10.0 * np.log10(ratio)


def from_db(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)
