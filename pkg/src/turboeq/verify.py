"""Self-checks of the equalizers and outer code against independent oracles.

``run_verification_suite`` runs every check and reports pass/fail per check;
the CLI ``verify`` verb maps any failure to exit status 1.
"""

from __future__ import annotations

import functools
import sys
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import trellis as tc
from .equalizers import (BRUTE_FORCE_MAX_BITS, EqualizerConfig, brute_force_posterior, equalize,
                         run_exact_bcjr)
from .interleaving import deinterleave, interleave, random_permutation
from .link import BPSK, SCENARIOS, block_rng, qam16_gray
from .oracles import reduced_bcjr_linear
from .outer_code import ConvCodeSpec, brute_force_code_posterior, decode_siso
from .turbo import transmit


def random_instance(rng, k=1, s=None, n_sym=None, noise_variance=None):
    """Small random ISI instance: ``(spec, received, apriori)``."""
    s = int(rng.integers(0, 3)) if s is None else s
    n_sym = int(rng.integers(1, 7)) if n_sym is None else n_sym
    taps = rng.normal(size=s + 1)
    taps[0] = taps[0] if abs(taps[0]) > 0.1 else 1.0
    const = BPSK if k == 1 else qam16_gray()
    nv = float(rng.uniform(0.3, 2.0)) if noise_variance is None else noise_variance
    spec = tc.ChannelSpec(taps, nv, k, const)
    x = const[rng.integers(0, 1 << k, n_sym)]
    y = np.convolve(x, spec.taps) + np.sqrt(nv / 2) * (rng.normal(size=n_sym + s)
                                                       + 1j * rng.normal(size=n_sym + s))
    return spec, y, rng.uniform(-3, 3, n_sym * k)


def scenario_block(name: str, ebno_db: float, seed: int, block: int = 0, apriori_scale=0.0):
    """One received block of a built-in scenario plus random a priori LLRs."""
    sc = SCENARIOS[name]
    ch = sc.channel_spec(ebno_db)
    rng = block_rng(seed, block)
    blk = transmit(sc, ch, rng)
    la = apriori_scale * rng.standard_normal(sc.coded_bits)
    return sc, ch, blk, la


def section_flows(trellis, log_sum: Callable[[float, float], float] = tc.log_sum) -> np.ndarray:
    """Per-section total path mass recomputed with a caller-supplied log-sum."""
    flows = np.empty(trellis.n_sections)
    for d in range(trellis.n_sections):
        n = trellis.n_br[d]
        v = (trellis.surv_alpha[d, trellis.br_origin[d, :n]] + trellis.br_gamma[d, :n]
             + trellis.beta[d + 1, trellis.br_target[d, :n]])
        flows[d] = functools.reduce(log_sum, v.tolist(), tc.NEG_INF) + trellis.offset[d]
    return flows


def check_oracle_equivalence(n_instances: int = 100, tol: float = 1e-9):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(n_instances):
        spec, y, la = random_instance(rng)
        got = run_exact_bcjr(spec, y, la).aposteriori
        ref = brute_force_posterior(spec, y, la).aposteriori
        worst = max(worst, float(np.max(np.abs(got - ref))))
    assert worst <= tol, f"max |exact - brute force| = {worst:.3g}"
    return f"max deviation {worst:.2e} over {n_instances} instances"


def check_code_oracle(n_info: int = 8, trials: int = 5, tol: float = 1e-9):
    code = ConvCodeSpec()
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(trials):
        la = rng.normal(0, 2, code.coded_length(n_info))
        got, ref = decode_siso(code, la), brute_force_code_posterior(code, la)
        worst = max(worst, float(np.max(np.abs(got.aposteriori_coded - ref.aposteriori_coded))),
                    float(np.max(np.abs(got.aposteriori_info - ref.aposteriori_info))))
    assert worst <= tol, f"max |code BCJR - enumeration| = {worst:.3g}"
    return f"max deviation {worst:.2e}"


def check_reduced_oracles(n_instances: int = 30, tol: float = 1e-9):
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(n_instances):
        spec, y, la = random_instance(rng, s=2, n_sym=6)
        for cfg in (EqualizerConfig("m", budget=2), EqualizerConfig("mstar", budget=2),
                    EqualizerConfig("rs", reduced_memory=1)):
            got = equalize(spec, y, la, cfg).aposteriori
            ref = reduced_bcjr_linear(spec, y, la, cfg.algorithm, cfg.budget,
                                      cfg.reduced_memory)["llr"]
            worst = max(worst, float(np.max(np.abs(got - ref))))
    assert worst <= tol, f"max |reduced - linear oracle| = {worst:.3g}"
    return f"max deviation {worst:.2e}"


def check_degenerate_budgets(tol: float = 1e-9):
    for name, ebno in (("scenario1", 5.0), ("scenario2", 10.0)):
        sc, ch, blk, la = scenario_block(name, ebno, seed=11, apriori_scale=1.0)
        ref = run_exact_bcjr(ch, blk.received, la).aposteriori
        full = ch.num_states
        for cfg in (EqualizerConfig("mstar", budget=full), EqualizerConfig("m", budget=full),
                    EqualizerConfig("rs", reduced_memory=ch.memory)):
            dev = float(np.max(np.abs(equalize(ch, blk.received, la, cfg).aposteriori - ref)))
            assert dev <= tol, f"{name} {cfg.label}: deviation {dev:.3g}"
    return "M*, M and RS at full budget equal exact BCJR on both scenarios"


def check_flow_conservation(log_sum=tc.log_sum, tol: float = 1e-8):
    rng = np.random.default_rng(5)
    spec, y, la = random_instance(rng, s=2, n_sym=40)
    tr = run_exact_bcjr(spec, y, la).trellis
    flows = section_flows(tr, log_sum)
    assert np.all(np.isfinite(flows)), "non-finite section flow"
    spread = float(np.max(np.abs(flows - flows[0])) / max(1.0, abs(flows[0])))
    assert spread <= tol, f"relative flow spread {spread:.3g}"
    return f"relative spread {spread:.2e}"


def check_mass_preservation(n_blocks: int = 100, tol: float = 1e-10):
    worst = 0.0
    for b in range(n_blocks):
        sc, ch, blk, la = scenario_block("scenario1", 4.0, seed=3, block=b, apriori_scale=1.0)
        for cfg in (EqualizerConfig("mstar", budget=3), EqualizerConfig("rs", reduced_memory=2)):
            tr = equalize(ch, blk.received, la, cfg).trellis
            worst = max(worst, float(np.max(np.abs(tr.mass_after - tr.mass_before))))
    assert worst <= tol, f"merged mass deviation {worst:.3g}"
    return f"max deviation {worst:.2e}"


def check_branch_balance(n_blocks: int = 200, budgets=(2, 3, 4)):
    one_sided_m = 0
    for b in range(n_blocks):
        sc, ch, blk, la = scenario_block("scenario1", 4.0, seed=17, block=b, apriori_scale=1.0)
        for m in budgets:
            tr = equalize(ch, blk.received, la, EqualizerConfig("mstar", budget=m)).trellis
            has0, has1 = tr.branch_sides()
            assert np.all(has0 & has1), f"M*-BCJR(M={m}) produced a one-sided bit in block {b}"
            assert not np.any(tr.one_sided), f"M*-BCJR(M={m}) one-sided posterior in block {b}"
        tr = equalize(ch, blk.received, la, EqualizerConfig("m", budget=2)).trellis
        one_sided_m += int(np.count_nonzero(tr.one_sided))
    assert one_sided_m > 0, "M-BCJR(M=2) never produced a one-sided bit (negative control)"
    return f"M*-BCJR balanced; M-BCJR(M=2) one-sided bits: {one_sided_m}"


def check_brute_force_guard():
    rng = np.random.default_rng(0)
    spec, y, la = random_instance(rng, s=1, n_sym=BRUTE_FORCE_MAX_BITS + 1)
    try:
        brute_force_posterior(spec, y, la)
    except ValueError:
        return "L*K=21 rejected"
    raise AssertionError("brute force accepted a block beyond the size guard")


def check_interleaver_roundtrip(n: int = 1000):
    rng = np.random.default_rng(1)
    for i in range(n):
        size = int(rng.integers(1, 64))
        p = random_permutation(size, i)
        x = rng.normal(size=size)
        assert np.array_equal(deinterleave(p, interleave(p, x)), x)
    return f"{n} random permutations"


def check_noiseless_loopback(n_blocks: int = 20):
    for name in ("scenario1", "scenario2"):
        sc = SCENARIOS[name]
        ch = sc.channel_spec(60.0)
        perm = sc.permutation()
        for b in range(n_blocks):
            blk = transmit(sc, ch, block_rng(5, b))
            eq = run_exact_bcjr(ch, blk.received, np.zeros(sc.coded_bits))
            dec = decode_siso(sc.code, deinterleave(perm, eq.extrinsic))
            assert np.array_equal((dec.aposteriori_info < 0).astype(np.int8), blk.info), \
                f"{name} block {b} not recovered"
    return f"{n_blocks} blocks per scenario recovered"


CHECKS: dict[str, Callable[[], str]] = {
    "oracle-equivalence": check_oracle_equivalence,
    "code-oracle": check_code_oracle,
    "reduced-oracles": check_reduced_oracles,
    "degenerate-budgets": check_degenerate_budgets,
    "flow-conservation": check_flow_conservation,
    "mass-preservation": check_mass_preservation,
    "branch-balance": check_branch_balance,
    "brute-force-guard": check_brute_force_guard,
    "interleaver-roundtrip": check_interleaver_roundtrip,
    "noiseless-loopback": check_noiseless_loopback,
}


@dataclass
class VerificationReport:
    results: list[tuple[str, bool, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.results)


def run_verification_suite(checks: dict[str, Callable[[], str]] | None = None,
                           stream=sys.stdout) -> VerificationReport:
    report = VerificationReport()
    for name, fn in (checks or CHECKS).items():
        t0 = time.perf_counter()
        try:
            ok, msg = True, fn() or ""
        except AssertionError as exc:
            ok, msg = False, str(exc)
        report.results.append((name, ok, msg))
        if stream is not None:
            print(f"{'PASS' if ok else 'FAIL'}  {name:<22} {msg} ({time.perf_counter() - t0:.1f}s)",
                  file=stream, flush=True)
    return report
