"""Compiled forward/backward/completion passes over a dynamically built trellis.

One forward routine serves all four equalizers; they differ only in how the
candidate states of a new depth are reduced to survivors:

* ``MODE_EXACT``: keep every reachable state.
* ``MODE_RS``: one survivor per class of states sharing their ``S'`` most
  recent tuples (the largest forward metric wins), others merged into it.
* ``MODE_M``: keep the ``M`` largest, delete the rest with their branches.
* ``MODE_MSTAR``: keep the ``M`` largest, merge every excess state into the
  survivor at the smallest state distance.

Forward metrics are rescaled after every depth so that the best survivor has
log-metric 0; the removed constant is accumulated in ``offset``.
"""

import numpy as np
from numba import njit

MODE_EXACT = 0
MODE_RS = 1
MODE_M = 2
MODE_MSTAR = 3

NEG_INF = -np.inf


@njit(cache=True, inline="always")
def _lse(a, b):
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a >= b:
        return a + np.log1p(np.exp(b - a))
    return b + np.log1p(np.exp(a - b))


@njit(cache=True)
def _state_distance(a, b, k, s):
    x = a ^ b
    if x == 0:
        return 0
    mask = (1 << k) - 1
    agree = 0
    while agree < s and ((x >> (agree * k)) & mask) == 0:
        agree += 1
    return s - agree


@njit(cache=True)
def forward(y, taps, const, log_prior, n_sym, k, s, mode, budget, s_red, sigma2):
    """Forward recursion; returns the surviving trellis.

    ``log_prior[i, u]`` is the log prior of tuple ``u`` at symbol time
    ``i + 1``.  ``budget`` is M for the M/M* modes, ``s_red`` is S' for RS.
    """
    n_sec = n_sym + s
    n_states = 1 << (k * s)
    smask = n_states - 1
    n_in = 1 << k
    lmask = n_in - 1

    if mode == MODE_EXACT:
        cap = n_states
    elif mode == MODE_RS:
        cap = 1 << (k * s_red)
    else:
        cap = min(budget, n_states)
    bmax = cap * n_in

    surv_state = np.zeros((n_sec + 1, cap), dtype=np.int64)
    surv_alpha = np.full((n_sec + 1, cap), NEG_INF)
    n_surv = np.zeros(n_sec + 1, dtype=np.int64)
    br_origin = np.zeros((n_sec, bmax), dtype=np.int32)
    br_input = np.zeros((n_sec, bmax), dtype=np.int32)
    br_target = np.zeros((n_sec, bmax), dtype=np.int32)
    br_gamma = np.zeros((n_sec, bmax))
    n_br = np.zeros(n_sec, dtype=np.int64)
    n_visited = np.zeros(n_sec, dtype=np.int64)
    mass_before = np.zeros(n_sec)
    mass_after = np.zeros(n_sec)
    offset = np.zeros(n_sec + 1)

    acc = np.full(n_states, NEG_INF)
    present = np.zeros(n_states, dtype=np.bool_)
    cand = np.zeros(n_states, dtype=np.int64)
    redirect = np.full(n_states, -1, dtype=np.int64)
    slot_of = np.full(n_states, -1, dtype=np.int64)
    is_surv = np.zeros(n_states, dtype=np.bool_)
    class_best = np.full(n_states, -1, dtype=np.int64)
    tmp_target = np.zeros(bmax, dtype=np.int64)
    tmp_val = np.zeros(bmax)
    lin = np.zeros(n_states)

    surv_state[0, 0] = 0
    surv_alpha[0, 0] = 0.0
    n_surv[0] = 1

    for d in range(n_sec):
        t = d + 1
        tail = t > n_sym
        n_inputs = 1 if tail else n_in
        for st in range(n_states):
            acc[st] = NEG_INF
            present[st] = False
            is_surv[st] = False
            redirect[st] = -1
            slot_of[st] = -1

        nb = 0
        for p in range(n_surv[d]):
            st = surv_state[d, p]
            a_p = surv_alpha[d, p]
            mu_hist = 0j
            for j in range(1, s + 1):
                ts = t - j
                if ts >= 1 and ts <= n_sym:
                    mu_hist += taps[j] * const[(st >> ((j - 1) * k)) & lmask]
            for a in range(n_inputs):
                if tail:
                    mu = mu_hist
                    lp = 0.0
                else:
                    mu = mu_hist + taps[0] * const[a]
                    lp = log_prior[d, a]
                r = y[d] - mu
                g = lp - (r.real * r.real + r.imag * r.imag) / sigma2
                tgt = ((st << k) | a) & smask
                br_origin[d, nb] = p
                br_input[d, nb] = a
                br_gamma[d, nb] = g
                tmp_target[nb] = tgt
                v = a_p + g
                tmp_val[nb] = v
                if not present[tgt] or v > acc[tgt]:
                    acc[tgt] = v
                present[tgt] = True
                nb += 1
        # exact log-sum per target: shift by the per-target maximum, sum in linear domain
        for b in range(nb):
            tgt = tmp_target[b]
            lin[tgt] += np.exp(tmp_val[b] - acc[tgt])
        for b in range(nb):
            tgt = tmp_target[b]
            if lin[tgt] > 0.0:
                acc[tgt] += np.log(lin[tgt])
                lin[tgt] = 0.0
        n_visited[d] = nb

        nc = 0
        gmax = NEG_INF
        for st in range(n_states):
            if present[st]:
                cand[nc] = st
                nc += 1
                lin[st] = 1.0  # merged mass relative to exp(acc[st])
                if acc[st] > gmax:
                    gmax = acc[st]
        tot = 0.0
        for c in range(nc):
            tot += np.exp(acc[cand[c]] - gmax)
        mass_before[d] = gmax + np.log(tot)

        if mode == MODE_EXACT or (mode != MODE_RS and nc <= cap):
            for c in range(nc):
                st = cand[c]
                is_surv[st] = True
                redirect[st] = st
        elif mode == MODE_RS:
            cmask = (1 << (k * s_red)) - 1
            for c in range(nc):
                class_best[cand[c] & cmask] = -1
            for c in range(nc):
                st = cand[c]
                key = st & cmask
                b = class_best[key]
                # candidates arrive in ascending index, strict > keeps the smaller index on ties
                if b < 0 or acc[st] > acc[b]:
                    class_best[key] = st
            for c in range(nc):
                st = cand[c]
                b = class_best[st & cmask]
                redirect[st] = b
                if b == st:
                    is_surv[st] = True
                else:
                    lin[b] += np.exp(acc[st] - acc[b])
        else:
            vals = np.empty(nc)
            for c in range(nc):
                vals[c] = -acc[cand[c]]
            order = np.argsort(vals, kind="mergesort")
            for r_ in range(cap):
                st = cand[order[r_]]
                is_surv[st] = True
                redirect[st] = st
            if mode == MODE_MSTAR:
                for r_ in range(cap, nc):
                    ex = cand[order[r_]]
                    best = -1
                    best_d = s + 1
                    for r2 in range(cap):
                        sv = cand[order[r2]]
                        dd = _state_distance(ex, sv, k, s)
                        if dd < best_d:
                            best, best_d = sv, dd
                        elif dd == best_d:
                            if acc[sv] > acc[best] or (acc[sv] == acc[best] and sv < best):
                                best = sv
                    redirect[ex] = best
                    # survivors dominate every excess state, so the ratio is <= 1
                    lin[best] += np.exp(acc[ex] - acc[best])

        ns = 0
        mx = NEG_INF
        for c in range(nc):
            st = cand[c]
            if is_surv[st]:
                m_st = acc[st] + np.log(lin[st])
                surv_state[d + 1, ns] = st
                surv_alpha[d + 1, ns] = m_st
                slot_of[st] = ns
                ns += 1
                if m_st > mx:
                    mx = m_st
            lin[st] = 0.0
        n_surv[d + 1] = ns
        tot = 0.0
        for p in range(ns):
            tot += np.exp(surv_alpha[d + 1, p] - mx)
        mass_after[d] = mx + np.log(tot)
        for p in range(ns):
            surv_alpha[d + 1, p] -= mx
        offset[d + 1] = offset[d] + mx

        kept = 0
        for b in range(nb):
            tgt = redirect[tmp_target[b]]
            if tgt < 0:
                continue
            br_origin[d, kept] = br_origin[d, b]
            br_input[d, kept] = br_input[d, b]
            br_gamma[d, kept] = br_gamma[d, b]
            br_target[d, kept] = slot_of[tgt]
            kept += 1
        n_br[d] = kept

    return (surv_state, surv_alpha, n_surv, br_origin, br_input, br_target, br_gamma,
            n_br, n_visited, mass_before, mass_after, offset)


@njit(cache=True)
def backward(n_surv, br_origin, br_target, br_gamma, n_br):
    n_sec = n_br.shape[0]
    cap = br_origin.shape[1]
    beta = np.full((n_sec + 1, max(cap, 1)), NEG_INF)
    lin = np.zeros(max(cap, 1))
    val = np.empty(cap)
    for p in range(n_surv[n_sec]):
        beta[n_sec, p] = 0.0
    for d in range(n_sec - 1, -1, -1):
        for b in range(n_br[d]):
            p = br_origin[d, b]
            v = br_gamma[d, b] + beta[d + 1, br_target[d, b]]
            val[b] = v
            if v > beta[d, p]:
                beta[d, p] = v
        for b in range(n_br[d]):
            p = br_origin[d, b]
            if beta[d, p] != NEG_INF:
                lin[p] += np.exp(val[b] - beta[d, p])
        for b in range(n_br[d]):
            p = br_origin[d, b]
            if lin[p] > 0.0:
                beta[d, p] += np.log(lin[p])
                lin[p] = 0.0
    return beta


@njit(cache=True)
def completion(n_sym, k, surv_alpha, offset, br_origin, br_input, br_target, br_gamma, n_br,
               beta, clamp):
    """Per-bit a posteriori LLRs plus the per-section total path mass.

    Returns ``(llr, flow, one_sided)`` where ``one_sided[i*K + j]`` is 1 when
    only one value of that bit has finite support.
    """
    n_sec = n_br.shape[0]
    llr = np.zeros(n_sym * k)
    one_sided = np.zeros(n_sym * k, dtype=np.int8)
    flow = np.full(n_sec, NEG_INF)
    # per-bit, per-side running maxima and shifted sums: each side is
    # log-summed on its own scale so a side far below the other does not
    # underflow to an empty (one-sided) sum
    mx0 = np.empty(k)
    mx1 = np.empty(k)
    sm0 = np.empty(k)
    sm1 = np.empty(k)
    val = np.empty(br_origin.shape[1])
    for d in range(n_sec):
        m = NEG_INF
        for j in range(k):
            mx0[j] = NEG_INF
            mx1[j] = NEG_INF
        for b in range(n_br[d]):
            v = surv_alpha[d, br_origin[d, b]] + br_gamma[d, b] + beta[d + 1, br_target[d, b]]
            val[b] = v
            if v > m:
                m = v
            if d < n_sym:
                a = br_input[d, b]
                for j in range(k):
                    if (a >> (k - 1 - j)) & 1:
                        if v > mx1[j]:
                            mx1[j] = v
                    elif v > mx0[j]:
                        mx0[j] = v
        if m == NEG_INF:
            if d < n_sym:
                for j in range(k):
                    one_sided[d * k + j] = 1
            continue
        for j in range(k):
            sm0[j] = 0.0
            sm1[j] = 0.0
        tot = 0.0
        for b in range(n_br[d]):
            v = val[b]
            tot += np.exp(v - m)
            if d < n_sym and v > NEG_INF:
                a = br_input[d, b]
                for j in range(k):
                    if (a >> (k - 1 - j)) & 1:
                        sm1[j] += np.exp(v - mx1[j])
                    else:
                        sm0[j] += np.exp(v - mx0[j])
        flow[d] = m + np.log(tot) + offset[d]
        if d < n_sym:
            for j in range(k):
                if mx0[j] == NEG_INF and mx1[j] == NEG_INF:
                    llr[d * k + j] = 0.0
                    one_sided[d * k + j] = 1
                elif mx1[j] == NEG_INF:
                    llr[d * k + j] = clamp
                    one_sided[d * k + j] = 1
                elif mx0[j] == NEG_INF:
                    llr[d * k + j] = -clamp
                    one_sided[d * k + j] = 1
                else:
                    llr[d * k + j] = (mx0[j] + np.log(sm0[j])) - (mx1[j] + np.log(sm1[j]))
    return llr, flow, one_sided


@njit(cache=True)
def branch_sides(n_sym, k, br_input, n_br):
    """Per-bit flags: bit 0 has a branch, bit 1 has a branch."""
    has0 = np.zeros(n_sym * k, dtype=np.bool_)
    has1 = np.zeros(n_sym * k, dtype=np.bool_)
    for d in range(n_sym):
        for b in range(n_br[d]):
            a = br_input[d, b]
            for j in range(k):
                if (a >> (k - 1 - j)) & 1:
                    has1[d * k + j] = True
                else:
                    has0[d * k + j] = True
    return has0, has1
