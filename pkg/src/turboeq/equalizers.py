"""SISO equalizers over the channel trellis: exact BCJR, RS-BCJR, M-BCJR, M*-BCJR.

All four share the compiled passes in :mod:`turboeq._kernels`; they differ
only in how the forward recursion reduces each new set of states.  A
brute-force enumerator over all input sequences is provided as an oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import logsumexp

from . import _kernels as kern
from .trellis import LLR_CLAMP, ChannelSpec, clamp_llr, log_priors_for_tuples

Algorithm = Literal["exact", "rs", "m", "mstar"]

_MODES = {"exact": kern.MODE_EXACT, "rs": kern.MODE_RS, "m": kern.MODE_M, "mstar": kern.MODE_MSTAR}

#: Largest block (in bits) :func:`brute_force_posterior` will enumerate.
BRUTE_FORCE_MAX_BITS = 20


@dataclass(frozen=True)
class EqualizerConfig:
    """Which equalizer to run and its complexity parameter.

    ``budget`` is the state budget M for ``m``/``mstar``; ``reduced_memory``
    is S' for ``rs``.
    """

    algorithm: Algorithm = "exact"
    budget: int | None = None
    reduced_memory: int | None = None

    def __post_init__(self):
        if self.algorithm not in _MODES:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm in ("m", "mstar") and (self.budget is None or self.budget < 1):
            raise ValueError(f"{self.algorithm} needs a state budget M >= 1")
        if self.algorithm == "rs" and (self.reduced_memory is None or self.reduced_memory < 0):
            raise ValueError("rs needs a reduced memory S' >= 0")

    def num_states(self, spec: ChannelSpec) -> int:
        """Maximum number of survivors per depth on ``spec``'s trellis."""
        full = spec.num_states
        if self.algorithm == "exact":
            return full
        if self.algorithm == "rs":
            return 1 << (spec.bits_per_symbol * self.reduced_memory)
        return min(self.budget, full)

    @property
    def label(self) -> str:
        if self.algorithm == "exact":
            return "exact"
        if self.algorithm == "rs":
            return f"rs(S'={self.reduced_memory})"
        return f"{self.algorithm}(M={self.budget})"


@dataclass(eq=False)
class Trellis:
    """The (possibly reduced) trellis built by a forward recursion.

    Depth ``d`` (0-based) holds states ``s_{d+1}``; section ``d`` holds the
    branches from depth ``d`` to ``d + 1``.  Forward metrics are stored
    rescaled: the true log metric is ``alpha + offset[d]``.  Branch targets
    and origins are survivor slots, not state indices.
    """

    n_sym: int
    k: int
    surv_state: np.ndarray
    surv_alpha: np.ndarray
    n_surv: np.ndarray
    br_origin: np.ndarray
    br_input: np.ndarray
    br_target: np.ndarray
    br_gamma: np.ndarray
    n_br: np.ndarray
    n_visited: np.ndarray
    mass_before: np.ndarray
    mass_after: np.ndarray
    offset: np.ndarray
    beta: np.ndarray | None = None
    flow: np.ndarray | None = None
    one_sided: np.ndarray | None = None

    @property
    def n_sections(self) -> int:
        return self.n_br.shape[0]

    def states(self, depth: int) -> np.ndarray:
        return self.surv_state[depth, : self.n_surv[depth]]

    def log_alpha(self, depth: int) -> np.ndarray:
        """Un-rescaled forward log metrics of the survivors at ``depth``."""
        return self.surv_alpha[depth, : self.n_surv[depth]] + self.offset[depth]

    def branches(self, section: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """``(origin_state, input, target_state, gamma)`` for one section."""
        n = self.n_br[section]
        org = self.surv_state[section, self.br_origin[section, :n]]
        tgt = self.surv_state[section + 1, self.br_target[section, :n]]
        return org, self.br_input[section, :n], tgt, self.br_gamma[section, :n]

    def branch_sides(self) -> tuple[np.ndarray, np.ndarray]:
        """Per coded bit: does some branch carry bit 0 / bit 1."""
        return kern.branch_sides(self.n_sym, self.k, self.br_input, self.n_br)


@dataclass(eq=False)
class PosteriorResult:
    """A posteriori and extrinsic LLRs of one equalizer call."""

    aposteriori: np.ndarray
    extrinsic: np.ndarray
    trellis: Trellis | None = None
    #: log of the total path mass, filled in by the brute-force oracle only
    log_total: float | None = None


def _check_inputs(spec: ChannelSpec, received, apriori):
    y = np.asarray(received, dtype=complex).ravel()
    k, s = spec.bits_per_symbol, spec.memory
    n_sym = y.size - s
    if n_sym < 1:
        raise ValueError(f"received block of length {y.size} is shorter than memory + 1")
    la = clamp_llr(np.asarray(apriori, dtype=float).ravel())
    if la.size != n_sym * k:
        raise ValueError(f"apriori has {la.size} values, expected {n_sym * k} (L*K with L={n_sym})")
    return y, la, n_sym


def forward_recursion(spec: ChannelSpec, received, apriori,
                      config: EqualizerConfig = EqualizerConfig()) -> Trellis:
    """Run the forward recursion of ``config.algorithm`` and return the trellis."""
    y, la, n_sym = _check_inputs(spec, received, apriori)
    k, s = spec.bits_per_symbol, spec.memory
    if config.algorithm == "rs" and config.reduced_memory > s:
        raise ValueError(f"reduced memory S'={config.reduced_memory} exceeds channel memory S={s}")
    log_prior = log_priors_for_tuples(la, k)
    out = kern.forward(
        y, spec.taps, spec.constellation, log_prior, n_sym, k, s,
        _MODES[config.algorithm], config.budget or 0, config.reduced_memory or 0,
        spec.noise_variance,
    )
    return Trellis(n_sym, k, *out)


def backward_recursion(trellis: Trellis) -> Trellis:
    """Fill ``trellis.beta`` over surviving states and kept branches."""
    trellis.beta = kern.backward(trellis.n_surv, trellis.br_origin, trellis.br_target,
                                 trellis.br_gamma, trellis.n_br)
    return trellis


def completion(trellis: Trellis, apriori) -> PosteriorResult:
    """Evaluate the per-bit branch sums; one-sided bits saturate to +-LLR_CLAMP."""
    if trellis.beta is None:
        backward_recursion(trellis)
    la = clamp_llr(np.asarray(apriori, dtype=float).ravel())
    llr, flow, one_sided = kern.completion(
        trellis.n_sym, trellis.k, trellis.surv_alpha, trellis.offset, trellis.br_origin,
        trellis.br_input, trellis.br_target, trellis.br_gamma, trellis.n_br, trellis.beta,
        LLR_CLAMP,
    )
    trellis.flow = flow
    trellis.one_sided = one_sided.astype(bool)
    return PosteriorResult(llr, llr - la, trellis)


def equalize(spec: ChannelSpec, received, apriori, config: EqualizerConfig) -> PosteriorResult:
    """Forward, backward and completion passes of the configured equalizer."""
    trellis = forward_recursion(spec, received, apriori, config)
    backward_recursion(trellis)
    return completion(trellis, apriori)


def run_exact_bcjr(spec: ChannelSpec, received, apriori) -> PosteriorResult:
    return equalize(spec, received, apriori, EqualizerConfig("exact"))


def run_rs_bcjr(spec: ChannelSpec, received, apriori, reduced_memory: int) -> PosteriorResult:
    """RS-BCJR keeping ``2**(K*reduced_memory)`` states.

    States sharing their ``reduced_memory`` most recent tuples are merged into
    the member with the largest forward metric; branch metrics leaving a
    survivor use its own full history.
    """
    if not 0 <= reduced_memory <= spec.memory:
        raise ValueError(f"reduced memory must lie in [0, {spec.memory}], got {reduced_memory}")
    return equalize(spec, received, apriori, EqualizerConfig("rs", reduced_memory=reduced_memory))


def run_m_bcjr(spec: ChannelSpec, received, apriori, budget: int) -> PosteriorResult:
    return equalize(spec, received, apriori, EqualizerConfig("m", budget=budget))


def run_mstar_bcjr(spec: ChannelSpec, received, apriori, budget: int) -> PosteriorResult:
    """M*-BCJR: keep the ``budget`` best states, merge the excess into them.

    Each excess state is merged into the survivor that agrees with it on the
    most recent tuples; ties go to the survivor with the larger forward
    metric, then to the smaller state index.  Excess states are processed in
    descending order of forward metric.
    """
    return equalize(spec, received, apriori, EqualizerConfig("mstar", budget=budget))


def brute_force_posterior(spec: ChannelSpec, received, apriori) -> PosteriorResult:
    """Exact posterior LLRs by enumerating every input sequence.

    Each sequence's joint log-probability is its prior plus the Gaussian
    log-likelihood of the whole received block (normalisation dropped).
    Limited to blocks of at most ``BRUTE_FORCE_MAX_BITS`` bits.
    """
    y, la, n_sym = _check_inputs(spec, received, apriori)
    k, s = spec.bits_per_symbol, spec.memory
    n_bits = n_sym * k
    if n_bits > BRUTE_FORCE_MAX_BITS:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_BITS} bits, got L*K={n_bits}")

    bits = np.array(list(itertools.product((0, 1), repeat=n_bits)), dtype=np.int64)
    lp0 = -np.logaddexp(0.0, -la)
    lp1 = -np.logaddexp(0.0, la)
    log_joint = np.where(bits == 0, lp0, lp1).sum(axis=1)

    weights = 1 << (k - 1 - np.arange(k))
    labels = (bits.reshape(-1, n_sym, k) * weights).sum(axis=2)
    x = np.concatenate([spec.constellation[labels], np.zeros((bits.shape[0], s))], axis=1)
    for t in range(n_sym + s):
        mu = np.zeros(bits.shape[0], dtype=complex)
        for j in range(s + 1):
            if 0 <= t - j < n_sym:
                mu += spec.taps[j] * x[:, t - j]
        log_joint -= np.abs(y[t] - mu) ** 2 / spec.noise_variance

    llr = np.empty(n_bits)
    for b in range(n_bits):
        llr[b] = logsumexp(log_joint[bits[:, b] == 0]) - logsumexp(log_joint[bits[:, b] == 1])
    return PosteriorResult(llr, llr - la, log_total=float(logsumexp(log_joint)))
