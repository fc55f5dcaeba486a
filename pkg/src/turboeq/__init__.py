"""Reduced-complexity SISO trellis equalizers and a turbo-equalization harness.

The four equalizers (exact BCJR, RS-BCJR, M-BCJR and M*-BCJR) share one
log-domain trellis engine.  Around them sit a recursive systematic outer code,
DRP interleavers, an ISI/AWGN link model and a Monte-Carlo sweep driver.
"""

from .trellis import (
    LLR_CLAMP,
    ChannelSpec,
    branch_metric,
    log_sum,
    prior_from_llr,
    state_distance,
    successor_state,
)
from .equalizers import (
    EqualizerConfig,
    PosteriorResult,
    Trellis,
    brute_force_posterior,
    equalize,
    run_exact_bcjr,
    run_m_bcjr,
    run_mstar_bcjr,
    run_rs_bcjr,
)
from .outer_code import ConvCodeSpec, CodeSisoResult, decode_siso, encode, hard_decision
from .interleaving import Permutation, make_drp, random_permutation, interleave, deinterleave
from .link import (ScenarioSpec, SCENARIOS, apply_channel, block_rng, map_symbols,
                   noise_variance_for)
from .turbo import IterationTrace, run_turbo, simulate_block, transmit

__version__ = "0.1.0"
