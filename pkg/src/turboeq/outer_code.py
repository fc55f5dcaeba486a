"""Recursive systematic rate-1/2 convolutional code with a terminated trellis.

Generator polynomials are octal integers of ``memory + 1`` bits whose most
significant bit multiplies the current register input (delay 0).  The
encoder state packs the last ``memory`` feedback-register values, most
recent in the least significant bit.  Coded bits are emitted interleaved,
``(systematic, parity)`` per step, and the trellis is driven back to state 0
by ``memory`` tail steps whose systematic bits are transmitted.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.special import logsumexp

from .trellis import LLR_CLAMP, clamp_llr

NEG_INF = -np.inf


@dataclass(frozen=True, eq=False)
class ConvCodeSpec:
    """A recursive systematic code ``(1, feedforward / feedback)``."""

    memory: int = 5
    feedback: int = 0o67
    feedforward: int = 0o45
    terminated: bool = True
    next_state: np.ndarray = field(init=False, repr=False)
    parity: np.ndarray = field(init=False, repr=False)
    tail_input: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = self.memory
        if m < 1:
            raise ValueError("memory must be >= 1")
        for name, poly in (("feedback", self.feedback), ("feedforward", self.feedforward)):
            if poly < 0 or poly >= 1 << (m + 1):
                raise ValueError(f"{name} polynomial {poly:o} has degree > memory {m}")
        if not (self.feedback >> m) & 1:
            raise ValueError("feedback polynomial needs a nonzero delay-0 coefficient")
        if not self.terminated:
            raise ValueError("only terminated codes are supported")
        n_states = 1 << m
        nxt = np.zeros((n_states, 2), dtype=np.int64)
        par = np.zeros((n_states, 2), dtype=np.int64)
        tail = np.zeros(n_states, dtype=np.int64)
        for s in range(n_states):
            fb = self._taps_dot(self.feedback, s)
            tail[s] = fb
            for u in (0, 1):
                w = u ^ fb
                nxt[s, u] = ((s << 1) | w) & (n_states - 1)
                par[s, u] = (w & (self.feedforward >> m)) ^ self._taps_dot(self.feedforward, s)
        object.__setattr__(self, "next_state", nxt)
        object.__setattr__(self, "parity", par)
        object.__setattr__(self, "tail_input", tail)

    def _taps_dot(self, poly: int, state: int) -> int:
        """XOR of the delayed register values selected by ``poly`` (delays 1..m)."""
        acc = 0
        for j in range(1, self.memory + 1):
            if (poly >> (self.memory - j)) & 1:
                acc ^= (state >> (j - 1)) & 1
        return acc

    @property
    def num_states(self) -> int:
        return 1 << self.memory

    def coded_length(self, n_info: int) -> int:
        return 2 * (n_info + self.memory)

    def info_length(self, n_coded: int) -> int:
        if n_coded % 2 or n_coded // 2 <= self.memory:
            raise ValueError(f"{n_coded} is not a valid terminated codeword length")
        return n_coded // 2 - self.memory


@dataclass(eq=False)
class CodeSisoResult:
    extrinsic_coded: np.ndarray
    aposteriori_info: np.ndarray
    aposteriori_coded: np.ndarray
    flow: np.ndarray | None = None


def encode(spec: ConvCodeSpec, info) -> np.ndarray:
    """Encode and terminate; returns ``2 * (len(info) + memory)`` bits."""
    info = np.asarray(info, dtype=np.int64).ravel()
    out = np.empty(spec.coded_length(info.size), dtype=np.int8)
    s = 0
    for t, u in enumerate(info):
        out[2 * t] = u
        out[2 * t + 1] = spec.parity[s, u]
        s = spec.next_state[s, u]
    for t in range(info.size, info.size + spec.memory):
        u = spec.tail_input[s]
        out[2 * t] = u
        out[2 * t + 1] = spec.parity[s, u]
        s = spec.next_state[s, u]
    assert s == 0, "termination failed to reach state 0"
    return out


def hard_decision(llr) -> np.ndarray:
    """Bit 0 where the LLR is >= 0, else 1."""
    return (np.asarray(llr) < 0).astype(np.int8)


@njit(cache=True)
def _lse(a, b):
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a >= b:
        return a + np.log1p(np.exp(b - a))
    return b + np.log1p(np.exp(a - b))


@njit(cache=True)
def _code_bcjr(la, n_info, memory, next_state, parity, tail_input):
    n_steps = n_info + memory
    n_states = next_state.shape[0]
    lp = np.empty((2 * n_steps, 2))
    for i in range(2 * n_steps):
        lp[i, 0] = -np.logaddexp(0.0, -la[i])
        lp[i, 1] = -np.logaddexp(0.0, la[i])

    alpha = np.full((n_steps + 1, n_states), NEG_INF)
    beta = np.full((n_steps + 1, n_states), NEG_INF)
    offset = np.zeros(n_steps + 1)
    alpha[0, 0] = 0.0
    for t in range(n_steps):
        tail = t >= n_info
        for s in range(n_states):
            a = alpha[t, s]
            if a == NEG_INF:
                continue
            for u in range(2):
                if tail and u != tail_input[s]:
                    continue
                g = lp[2 * t, u] + lp[2 * t + 1, parity[s, u]]
                ns = next_state[s, u]
                alpha[t + 1, ns] = _lse(alpha[t + 1, ns], a + g)
        mx = np.max(alpha[t + 1])
        alpha[t + 1] -= mx
        offset[t + 1] = offset[t] + mx

    beta[n_steps, 0] = 0.0
    for t in range(n_steps - 1, -1, -1):
        tail = t >= n_info
        for s in range(n_states):
            for u in range(2):
                if tail and u != tail_input[s]:
                    continue
                g = lp[2 * t, u] + lp[2 * t + 1, parity[s, u]]
                beta[t, s] = _lse(beta[t, s], g + beta[t + 1, next_state[s, u]])

    post = np.zeros(2 * n_steps)
    flow = np.empty(n_steps)
    for t in range(n_steps):
        tail = t >= n_info
        num_s = NEG_INF
        den_s = NEG_INF
        num_p = NEG_INF
        den_p = NEG_INF
        for s in range(n_states):
            a = alpha[t, s]
            if a == NEG_INF:
                continue
            for u in range(2):
                if tail and u != tail_input[s]:
                    continue
                p = parity[s, u]
                v = a + lp[2 * t, u] + lp[2 * t + 1, p] + beta[t + 1, next_state[s, u]]
                if u == 0:
                    num_s = _lse(num_s, v)
                else:
                    den_s = _lse(den_s, v)
                if p == 0:
                    num_p = _lse(num_p, v)
                else:
                    den_p = _lse(den_p, v)
        flow[t] = _lse(num_s, den_s) + offset[t]
        post[2 * t] = _ratio(num_s, den_s)
        post[2 * t + 1] = _ratio(num_p, den_p)
    return post, flow


@njit(cache=True)
def _ratio(num, den):
    if den == NEG_INF and num == NEG_INF:
        return 0.0
    if den == NEG_INF:
        return 40.0
    if num == NEG_INF:
        return -40.0
    return num - den


def decode_siso(spec: ConvCodeSpec, apriori_coded) -> CodeSisoResult:
    """Log-domain BCJR over the terminated code trellis.

    Parameters
    ----------
    spec : ConvCodeSpec
    apriori_coded : array_like, shape (2 * (N_info + memory),)
        A priori LLRs of the coded bits in transmission order.

    Returns
    -------
    CodeSisoResult
        Extrinsic LLRs of all coded bits (a posteriori minus a priori) and a
        posteriori LLRs of the ``N_info`` information bits.  Coded-bit
        posteriors whose support is one-sided (possible only for tail
        systematic bits forced by termination) saturate to +-40.
    """
    la = clamp_llr(np.asarray(apriori_coded, dtype=float).ravel())
    n_info = spec.info_length(la.size)
    post, flow = _code_bcjr(la, n_info, spec.memory, spec.next_state, spec.parity,
                            spec.tail_input)
    return CodeSisoResult(post - la, post[0 : 2 * n_info : 2].copy(), post, flow)


def all_codewords(spec: ConvCodeSpec, n_info: int) -> tuple[np.ndarray, np.ndarray]:
    """Every info block of length ``n_info`` and its terminated codeword."""
    infos = np.array(list(itertools.product((0, 1), repeat=n_info)), dtype=np.int8)
    codes = np.array([encode(spec, u) for u in infos])
    return infos, codes


def brute_force_code_posterior(spec: ConvCodeSpec, apriori_coded) -> CodeSisoResult:
    """MAP LLRs by summing over every terminated codeword (small blocks only)."""
    la = clamp_llr(np.asarray(apriori_coded, dtype=float).ravel())
    n_info = spec.info_length(la.size)
    if n_info > 16:
        raise ValueError("codeword enumeration limited to 16 information bits")
    _, codes = all_codewords(spec, n_info)
    lp0 = -np.logaddexp(0.0, -la)
    lp1 = -np.logaddexp(0.0, la)
    log_w = np.where(codes == 0, lp0, lp1).sum(axis=1)
    post = np.empty(la.size)
    for i in range(la.size):
        zero, one = log_w[codes[:, i] == 0], log_w[codes[:, i] == 1]
        if one.size == 0:
            post[i] = LLR_CLAMP
        elif zero.size == 0:
            post[i] = -LLR_CLAMP
        else:
            post[i] = logsumexp(zero) - logsumexp(one)
    return CodeSisoResult(post - la, post[0 : 2 * n_info : 2].copy(), post)
