"""Partial transmit sequences: partitioning, per-sub-block signals, combining.

A :class:`SubblockSet` keeps the M oversampled time signals of the
sub-blocks, so scoring a phase vector is a multiply-accumulate over
precomputed signals with no further transforms.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InputSizeError
from .ofdm import PaprValue, idft_oversampled, papr, papr_ratio

SCHEMES = ("random", "adjacent", "interleaved")


@dataclass(frozen=True)
class Partition:
    """Disjoint assignment of subcarriers to sub-blocks."""

    assignment: np.ndarray  # subcarrier index -> sub-block index
    m_subblocks: int
    scheme: str = "random"
    seed: int = 0

    @property
    def n_subcarriers(self) -> int:
        return self.assignment.size

    def members(self, m) -> np.ndarray:
        return np.flatnonzero(self.assignment == m)


def make_partition(n_subcarriers, m_subblocks, scheme="random", seed=0) -> Partition:
    """Build a deterministic partition of ``n_subcarriers`` into ``m_subblocks``.

    ``random`` shuffles 0..N-1 with ``seed`` and cuts the permutation into M
    consecutive groups of N/M; ``adjacent`` uses contiguous runs;
    ``interleaved`` sends subcarrier n to sub-block n mod M.
    """
    n, m = int(n_subcarriers), int(m_subblocks)
    if m < 1 or n < 1:
        raise ConfigurationError("need N >= 1 and M >= 1")
    if m > n:
        raise ConfigurationError(f"cannot split {n} subcarriers into {m} sub-blocks")
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown partition scheme {scheme!r}")
    if scheme in ("random", "interleaved") and n % m:
        raise ConfigurationError(f"{scheme} partition needs M | N (N={n}, M={m})")

    if scheme == "random":
        order = np.random.default_rng(seed).permutation(n)
        assignment = np.empty(n, dtype=np.intp)
        assignment[order] = np.repeat(np.arange(m), n // m)
    elif scheme == "adjacent":
        sizes = np.full(m, n // m)
        sizes[: n % m] += 1
        assignment = np.repeat(np.arange(m), sizes)
    else:
        assignment = np.arange(n) % m
    assignment.setflags(write=False)
    return Partition(assignment, m, scheme, int(seed))


@dataclass(frozen=True)
class SubblockSet:
    """Zero-filled frequency sub-blocks and their oversampled time signals."""

    freq_parts: np.ndarray  # (M, N)
    time_parts: np.ndarray  # (M, L*N)
    oversampling: int
    real_parts: np.ndarray = field(init=False, repr=False, compare=False)
    imag_parts: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        # contiguous copies keep the real-weight products on the BLAS path
        object.__setattr__(self, "real_parts", np.ascontiguousarray(self.time_parts.real))
        object.__setattr__(self, "imag_parts", np.ascontiguousarray(self.time_parts.imag))

    @property
    def m_subblocks(self) -> int:
        return self.time_parts.shape[0]

    @property
    def n_subcarriers(self) -> int:
        return self.freq_parts.shape[1]


def split_and_transform(block, partition: Partition, oversampling=4) -> SubblockSet:
    block = np.asarray(block, dtype=complex)
    if block.ndim != 1 or block.size != partition.n_subcarriers:
        raise InputSizeError(
            f"block of length {block.size} does not match partition over {partition.n_subcarriers}"
        )
    mask = partition.assignment[None, :] == np.arange(partition.m_subblocks)[:, None]
    freq_parts = np.where(mask, block[None, :], 0)
    time_parts = idft_oversampled(freq_parts, oversampling)
    freq_parts.setflags(write=False)
    time_parts.setflags(write=False)
    return SubblockSet(freq_parts, time_parts, oversampling)


def phase_alphabet(w_alphabet) -> np.ndarray:
    """The W allowed phase factors exp(j 2 pi l / W), with exact +-1 and +-j."""
    if w_alphabet < 1:
        raise ConfigurationError("W must be >= 1")
    alphabet = np.exp(2j * np.pi * np.arange(w_alphabet) / w_alphabet)
    # snap roundoff so that W=2 gives exactly {1, -1}
    alphabet.real[np.abs(alphabet.real) < 1e-15] = 0.0
    alphabet.imag[np.abs(alphabet.imag) < 1e-15] = 0.0
    return alphabet


def bits_to_phases(c) -> np.ndarray:
    """b = 1 - 2c."""
    return 1 - 2 * np.asarray(c, dtype=np.int8)


def combine(subblocks: SubblockSet, b) -> np.ndarray:
    """Phase-weighted sum of the sub-block time signals."""
    b = np.asarray(b)
    if b.shape != (subblocks.m_subblocks,):
        raise InputSizeError(f"expected {subblocks.m_subblocks} phase factors, got shape {b.shape}")
    return b @ subblocks.time_parts


def objective(subblocks: SubblockSet, c) -> PaprValue:
    """PAPR of the combined signal for binary vector ``c`` (phases 1 - 2c)."""
    c = np.asarray(c)
    if c.shape != (subblocks.m_subblocks,):
        raise InputSizeError(f"expected {subblocks.m_subblocks} bits, got shape {c.shape}")
    return papr(combine(subblocks, bits_to_phases(c)))


def batch_papr(subblocks: SubblockSet, phases) -> np.ndarray:
    """Linear PAPR for each row of a (K, M) array of phase factors."""
    phases = np.atleast_2d(phases)
    if phases.shape[1] != subblocks.m_subblocks:
        raise InputSizeError(f"expected rows of {subblocks.m_subblocks} phase factors")
    if np.isrealobj(phases) or not np.any(phases.imag):
        # real weights: two real products are much cheaper than one complex
        weights = np.real(phases).astype(float)
        re = weights @ subblocks.real_parts
        im = weights @ subblocks.imag_parts
        power = re * re + im * im
        return power.max(axis=1) / power.mean(axis=1)
    return papr_ratio(phases @ subblocks.time_parts)


def batch_objective(subblocks: SubblockSet, c) -> np.ndarray:
    """Linear PAPR for each row of a (K, M) binary array."""
    return batch_papr(subblocks, bits_to_phases(np.atleast_2d(c)))
