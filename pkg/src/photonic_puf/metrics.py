"""PUF quality metrics, response autocorrelation, and CRP-distribution
export.

Responses are passed around as arrays of n-bit integers (MSB-first bit
order, as produced by the encoder); every metric takes the bit width
explicitly. Hamming distances are accumulated as exact integers before the
single final division.
"""

from __future__ import annotations

import numpy as np

from .encoding import Interpretation


class DegenerateInputError(ValueError):
    """Raised for inputs a metric cannot normalize (e.g. constant responses)."""


def _as_codes(responses, n_bits: int) -> np.ndarray:
    a = np.asarray(responses, dtype=np.uint64)
    if a.size == 0:
        raise ValueError("empty response set")
    if n_bits < 1 or n_bits > 64:
        raise ValueError("n_bits must lie in 1..64")
    if np.any(a >= (np.uint64(1) << np.uint64(n_bits))):
        raise ValueError("response exceeds declared bit width")
    return a


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a)


def uniqueness(responses, n_bits: int) -> float:
    """Mean normalized pairwise Hamming distance across k PUFs.

    responses: array-like of shape (k, m), challenge-aligned.
    """
    r = _as_codes(responses, n_bits)
    if r.ndim != 2:
        raise ValueError("expected shape (k, m)")
    k, m = r.shape
    if k < 2:
        raise ValueError("uniqueness needs at least two PUFs")
    total = 0
    for i in range(k - 1):
        total += int(_popcount(r[i] ^ r[i + 1 :]).sum())
    return 2.0 * total / (k * (k - 1) * m * n_bits)


def uniformity(responses, n_bits: int) -> float:
    """Fraction of one-bits over all of one PUF's responses."""
    r = _as_codes(responses, n_bits)
    if r.ndim != 1:
        raise ValueError("expected shape (m,)")
    return int(_popcount(r).sum()) / (n_bits * r.shape[0])


def reliability(baseline, repeats, n_bits: int) -> float:
    """1 minus the mean normalized Hamming distance between a baseline
    response set and k repeated collections (identical repeats give 1.0)."""
    base = _as_codes(baseline, n_bits)
    rep = _as_codes(repeats, n_bits)
    if base.ndim != 1 or rep.ndim != 2 or rep.shape[1] != base.shape[0]:
        raise ValueError("expected baseline (m,) and repeats (k, m)")
    k, m = rep.shape
    total = int(_popcount(rep ^ base[np.newaxis, :]).sum())
    return 1.0 - total / (k * m * n_bits)


def bit_aliasing(responses, bit_position: int, n_bits: int) -> float:
    """Fraction of ones at one response bit position across k PUFs' m
    responses. bit_position 0 is the MSB."""
    r = _as_codes(responses, n_bits)
    if r.ndim != 2:
        raise ValueError("expected shape (k, m)")
    if not 0 <= bit_position < n_bits:
        raise ValueError("bit_position out of range")
    shift = np.uint64(n_bits - 1 - bit_position)
    ones = int(((r >> shift) & np.uint64(1)).sum())
    return ones / (r.shape[0] * r.shape[1])


def autocorrelation(sequence, max_lag: int) -> np.ndarray:
    """Normalized autocorrelation at lags 0..max_lag, biased estimator
    (denominator spans all m terms). Computed via FFT."""
    x = np.asarray(sequence, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 2:
        raise ValueError("sequence must be 1-D with at least 2 entries")
    m = x.shape[0]
    if not 1 <= max_lag < m:
        raise ValueError("max_lag must lie in 1..m-1")
    x = x - x.mean()
    denom = float(np.dot(x, x))
    if denom == 0.0:
        raise DegenerateInputError("constant sequence has no autocorrelation")
    nfft = 1
    while nfft < 2 * m:
        nfft *= 2
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1]
    acf = acov / denom
    acf[0] = 1.0
    return acf


def crp_scatter(interp: Interpretation) -> np.ndarray:
    """(challenge integer, response integer) pairs in challenge order,
    shape (m, 2)."""
    out = np.empty((interp.responses.shape[0], 2), dtype=np.int64)
    out[:, 0] = interp.challenge_codes
    out[:, 1] = interp.responses
    return out
