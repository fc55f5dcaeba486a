"""Channel trellis primitives shared by every equalizer.

All probabilities live in the natural-log domain; probability zero is ``-inf``.
A trellis state packs the ``S`` most recent ``K``-bit input tuples into one
integer, most recent tuple in the least significant ``K`` bits.  Within a
tuple the first bit of the group is the most significant bit.

Bit/amplitude convention used throughout the package: bit 0 <-> a = +1,
bit 1 <-> a = -1, so a positive LLR favours bit 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: Saturation magnitude for every LLR entering or leaving a SISO block.
LLR_CLAMP = 40.0

NEG_INF = -math.inf


def log_sum(a: float, b: float) -> float:
    """Return ``ln(exp(a) + exp(b))`` without leaving the log domain."""
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a >= b:
        return a + math.log1p(math.exp(b - a))
    return b + math.log1p(math.exp(a - b))


def clamp_llr(llr):
    """Clip LLRs to ``[-LLR_CLAMP, LLR_CLAMP]``; arrays in, arrays out."""
    return np.clip(np.asarray(llr, dtype=float), -LLR_CLAMP, LLR_CLAMP)


def prior_from_llr(la: float, bit_value: int) -> float:
    """Log prior probability of ``a = bit_value`` given its a priori LLR.

    ``bit_value`` is the amplitude, +1 or -1.  The result is
    ``log(exp(+-la) / (1 + exp(+-la)))`` evaluated as ``-log(1 + exp(-+la))``.
    """
    if bit_value not in (1, -1):
        raise ValueError(f"bit_value must be +1 or -1, got {bit_value!r}")
    return -float(np.logaddexp(0.0, -bit_value * la))


def log_priors_for_tuples(la: np.ndarray, k: int) -> np.ndarray:
    """Table of log P(tuple) for each symbol time and each of the 2^K tuples.

    Parameters
    ----------
    la : array of shape (L*K,)
        A priori LLRs, grouped ``K`` per symbol.
    k : int
        Bits per symbol.

    Returns
    -------
    ndarray of shape (L, 2**K)
        Entry ``[i, u]`` is ``sum_k log P(a_i^k)`` for the tuple with integer
        label ``u`` (first bit of the group is the MSB).
    """
    la = clamp_llr(la).reshape(-1, k)
    # log P(bit=0) = log P(a=+1) and log P(bit=1) = log P(a=-1)
    lp0 = -np.logaddexp(0.0, -la)
    lp1 = -np.logaddexp(0.0, la)
    labels = np.arange(1 << k)
    bits = (labels[:, None] >> (k - 1 - np.arange(k))[None, :]) & 1  # (2^K, K)
    return np.where(bits[None, :, :] == 0, lp0[:, None, :], lp1[:, None, :]).sum(axis=2)


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """ISI channel, noise level and memoryless mapper seen by the equalizer.

    ``constellation[u]`` is the point transmitted for the ``K``-bit label
    ``u``; indexing by label makes the label map a bijection by construction.
    ``noise_variance`` is the variance of the complex noise sample, i.e.
    ``E|n|^2``; the branch metric uses ``exp(-|r - mu|^2 / noise_variance)``.
    """

    taps: np.ndarray
    noise_variance: float
    bits_per_symbol: int
    constellation: np.ndarray
    memory: int = field(init=False)

    def __post_init__(self):
        taps = np.atleast_1d(np.asarray(self.taps, dtype=complex))
        const = np.atleast_1d(np.asarray(self.constellation, dtype=complex))
        if taps.ndim != 1 or taps.size < 1:
            raise ValueError("taps must be a non-empty 1-D sequence")
        if taps[0] == 0:
            raise ValueError("leading tap h_0 must be nonzero")
        if not self.noise_variance > 0:
            raise ValueError(f"noise variance must be positive, got {self.noise_variance}")
        k = int(self.bits_per_symbol)
        if k < 1:
            raise ValueError("bits_per_symbol must be >= 1")
        if const.shape != (1 << k,):
            raise ValueError(f"constellation must have exactly {1 << k} points")
        if np.unique(np.round(const, 12)).size != const.size:
            raise ValueError("constellation points must be distinct")
        if abs(np.mean(np.abs(const) ** 2) - 1.0) > 1e-12:
            raise ValueError("constellation must have unit average energy")
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "constellation", const)
        object.__setattr__(self, "bits_per_symbol", k)
        object.__setattr__(self, "noise_variance", float(self.noise_variance))
        object.__setattr__(self, "memory", taps.size - 1)

    @property
    def num_states(self) -> int:
        return 1 << (self.bits_per_symbol * self.memory)

    def with_noise_variance(self, noise_variance: float) -> "ChannelSpec":
        return ChannelSpec(self.taps, noise_variance, self.bits_per_symbol, self.constellation)


def pack_state(tuples: Sequence[int], k: int) -> int:
    """Pack ``(a_{i-1}, ..., a_{i-S})`` (tuple labels, most recent first)."""
    s = 0
    for j, a in enumerate(tuples):
        s |= int(a) << (j * k)
    return s


def unpack_state(state: int, k: int, s: int) -> tuple[int, ...]:
    """Inverse of :func:`pack_state`."""
    mask = (1 << k) - 1
    return tuple((state >> (j * k)) & mask for j in range(s))


def successor_state(state: int, input_label: int, k: int, s: int) -> int:
    """Shift ``input_label`` into the most recent slot, dropping the oldest tuple."""
    if s == 0:
        return 0
    return ((state << k) | input_label) & ((1 << (k * s)) - 1)


def state_distance(a: int, b: int, k: int, s: int) -> int:
    """Number of trailing (oldest) K-tuples that must be ignored for ``a == b``.

    Returns the smallest ``d`` in ``[0, s]`` such that the two states agree
    on their ``s - d`` most recent tuples.
    """
    x = a ^ b
    if x == 0:
        return 0
    mask = (1 << k) - 1
    agree = 0
    while agree < s and (x >> (agree * k)) & mask == 0:
        agree += 1
    return s - agree


def branch_metric(
    spec: ChannelSpec,
    received: complex,
    history: int,
    input_label: int | None,
    priors: Sequence[float] = (),
    *,
    time: int | None = None,
    length: int | None = None,
) -> float:
    """Log branch metric ``sum log P(a_i^k) - |r - sum_j h_j x_{i-j}|^2 / sigma^2``.

    The Gaussian normalisation is dropped; it is common to every branch of a
    section.  ``input_label=None`` is the empty tuple of a tail section: it
    transmits ``x_i = 0`` and contributes log-probability 0.  When ``time``
    (1-based) and ``length`` are given, history slots referring to symbol
    times outside ``[1, length]`` also transmit zero.
    """
    if spec.noise_variance <= 0:
        raise ValueError("noise variance must be positive")
    k, s = spec.bits_per_symbol, spec.memory
    past = unpack_state(history, k, s)

    def in_range(t_sym: int) -> bool:
        return time is None or (1 <= t_sym <= (length if length is not None else t_sym))

    mu = 0j
    if input_label is not None and (time is None or in_range(time)):
        mu += spec.taps[0] * spec.constellation[input_label]
    for j in range(1, s + 1):
        if time is None or in_range(time - j):
            mu += spec.taps[j] * spec.constellation[past[j - 1]]
    resid = received - mu
    return float(sum(priors)) - (resid.real**2 + resid.imag**2) / spec.noise_variance
