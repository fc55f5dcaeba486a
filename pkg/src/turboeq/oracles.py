"""Slow reference implementations used to cross-check the compiled equalizers.

Everything here works on small blocks in plain linear-domain probability
arithmetic with Python dictionaries, sharing no code with
:mod:`turboeq._kernels`.  The trellis is rebuilt from first principles:
states are tuples of past labels (most recent first), and symbols outside
the block transmit zero.
"""

from __future__ import annotations

import math

import numpy as np

from .trellis import LLR_CLAMP, ChannelSpec


def _bit_prob(la: float, bit: int) -> float:
    # P(a = +1) for bit 0, P(a = -1) for bit 1
    sign = 1.0 if bit == 0 else -1.0
    return 1.0 / (1.0 + math.exp(-sign * la))


def _label_bits(label: int, k: int) -> list[int]:
    return [(label >> (k - 1 - j)) & 1 for j in range(k)]


def _gamma(spec: ChannelSpec, y, la, t: int, n_sym: int, state: tuple, a):
    """Linear branch metric for time ``t`` (1-based); ``a is None`` in the tail."""
    k = spec.bits_per_symbol
    prior = 1.0
    xs = [0j] * (spec.memory + 1)
    if a is not None:
        for j, bit in enumerate(_label_bits(a, k)):
            prior *= _bit_prob(la[(t - 1) * k + j], bit)
        xs[0] = spec.constellation[a]
    for j in range(1, spec.memory + 1):
        if 1 <= t - j <= n_sym:
            xs[j] = spec.constellation[state[j - 1]]
    mu = sum(h * x for h, x in zip(spec.taps, xs))
    return prior * math.exp(-abs(y[t - 1] - mu) ** 2 / spec.noise_variance)


def _distance(a: tuple, b: tuple) -> int:
    n = len(a)
    agree = 0
    while agree < n and a[agree] == b[agree]:
        agree += 1
    return n - agree


def reduced_bcjr_linear(spec: ChannelSpec, received, apriori, algorithm: str = "exact",
                        budget: int | None = None, reduced_memory: int | None = None):
    """Straight-line forward/backward/completion in the probability domain.

    ``algorithm`` is ``exact``, ``rs``, ``m`` or ``mstar`` with the same
    tie-breaking conventions as the compiled equalizers.  Returns a dict with
    ``llr``, ``alpha`` (list of ``{state: value}`` per depth), ``sections``
    (lists of ``[origin, label, target, gamma]``) and ``beta``.
    """
    y = np.asarray(received, dtype=complex)
    la = np.clip(np.asarray(apriori, dtype=float), -LLR_CLAMP, LLR_CLAMP)
    k, s = spec.bits_per_symbol, spec.memory
    n_sym = y.size - s
    labels = range(1 << k)
    zero_state = tuple([0] * s)

    alpha = [{zero_state: 1.0}]
    sections = []
    for t in range(1, n_sym + s + 1):
        cur = alpha[-1]
        nxt: dict[tuple, float] = {}
        sec = []
        inputs = labels if t <= n_sym else [None]
        for st in cur:
            for a in inputs:
                g = _gamma(spec, y, la, t, n_sym, st, a)
                tgt = ((0 if a is None else a),) + st[:-1] if s else ()
                sec.append([st, a, tgt, g])
                nxt.setdefault(tgt, 0.0)
        for org, _, tgt, g in sec:
            nxt[tgt] += cur[org] * g

        if algorithm == "rs":
            classes: dict[tuple, list] = {}
            for st in sorted(nxt):
                classes.setdefault(st[:reduced_memory], []).append(st)
            frozen = dict(nxt)
            for members in classes.values():
                keep = min(members, key=lambda st: (-frozen[st], _index(st, k)))
                for st in members:
                    if st != keep:
                        _merge(sec, nxt, st, keep)
        elif algorithm in ("m", "mstar") and len(nxt) > budget:
            ranked = sorted(nxt, key=lambda st: (-nxt[st], _index(st, k)))
            keep, excess = ranked[:budget], ranked[budget:]
            frozen = dict(nxt)
            for ex in excess:
                if algorithm == "m":
                    del nxt[ex]
                    sec = [b for b in sec if b[2] != ex]
                    continue
                best = min(keep, key=lambda sv: (_distance(ex, sv), -frozen[sv], _index(sv, k)))
                _merge(sec, nxt, ex, best)
        alpha.append(nxt)
        sections.append(sec)

    beta = [dict() for _ in alpha]
    beta[-1] = {st: 1.0 for st in alpha[-1]}
    for d in range(len(sections) - 1, -1, -1):
        beta[d] = {st: 0.0 for st in alpha[d]}
        for org, _, tgt, g in sections[d]:
            beta[d][org] += g * beta[d + 1][tgt]

    llr = np.zeros(n_sym * k)
    for d in range(n_sym):
        num = [0.0] * k
        den = [0.0] * k
        for org, a, tgt, g in sections[d]:
            v = alpha[d][org] * g * beta[d + 1][tgt]
            for j, bit in enumerate(_label_bits(a, k)):
                if bit == 0:
                    num[j] += v
                else:
                    den[j] += v
        for j in range(k):
            if den[j] == 0.0:
                llr[d * k + j] = LLR_CLAMP if num[j] > 0 else 0.0
            elif num[j] == 0.0:
                llr[d * k + j] = -LLR_CLAMP
            else:
                llr[d * k + j] = math.log(num[j] / den[j])
    return {"llr": llr, "alpha": alpha, "sections": sections, "beta": beta}


def _index(st: tuple, k: int) -> int:
    return sum(a << (j * k) for j, a in enumerate(st))


def _merge(sec, alpha_next, src, dst):
    for b in sec:
        if b[2] == src:
            b[2] = dst
    alpha_next[dst] += alpha_next.pop(src)
