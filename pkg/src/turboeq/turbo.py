"""The iterative receiver: equalizer and decoder exchanging extrinsic LLRs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .equalizers import EqualizerConfig, equalize
from .interleaving import deinterleave, interleave
from .link import ScenarioSpec, apply_channel, block_rng, map_symbols
from .outer_code import decode_siso, encode, hard_decision
from .trellis import ChannelSpec


@dataclass
class IterationTrace:
    """Per-iteration outcome of one received block."""

    bit_errors: list[int] = field(default_factory=list)
    frame_errors: list[bool] = field(default_factory=list)
    mean_abs_extrinsic: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.bit_errors)


@dataclass(eq=False)
class Block:
    info: np.ndarray
    coded: np.ndarray
    received: np.ndarray


def transmit(scenario: ScenarioSpec, channel: ChannelSpec, rng) -> Block:
    """Draw info bits, encode, interleave, map and pass them through the channel."""
    info = rng.integers(0, 2, scenario.info_bits, dtype=np.int8)
    coded = encode(scenario.code, info)
    symbols = map_symbols(scenario.modulation, interleave(scenario.permutation(), coded))
    return Block(info, coded, apply_channel(channel, symbols, rng))


def run_turbo(scenario: ScenarioSpec, eq_config: EqualizerConfig, received, true_info,
              channel: ChannelSpec) -> IterationTrace:
    """Run ``scenario.iterations`` equalize/decode rounds on one received block.

    Only extrinsic values cross between the two SISO blocks; the first
    equalizer pass sees all-zero a priori LLRs.  Errors are counted on the
    decoder's a posteriori information-bit decisions after every iteration.
    """
    if channel.bits_per_symbol != scenario.bits_per_symbol or channel.memory != scenario.memory:
        raise ValueError("channel description does not match the scenario")
    received = np.asarray(received, dtype=complex)
    if received.size != scenario.n_symbols + scenario.memory:
        raise ValueError(f"received block has {received.size} samples, "
                         f"expected {scenario.n_symbols + scenario.memory}")
    true_info = np.asarray(true_info)
    perm = scenario.permutation()
    trace = IterationTrace()
    apriori_eq = np.zeros(scenario.coded_bits)
    for _ in range(scenario.iterations):
        eq = equalize(channel, received, apriori_eq, eq_config)
        dec = decode_siso(scenario.code, deinterleave(perm, eq.extrinsic))
        n_err = int(np.count_nonzero(hard_decision(dec.aposteriori_info) != true_info))
        trace.bit_errors.append(n_err)
        trace.frame_errors.append(n_err > 0)
        trace.mean_abs_extrinsic.append(float(np.mean(np.abs(dec.extrinsic_coded))))
        apriori_eq = interleave(perm, dec.extrinsic_coded)
    return trace


def simulate_block(scenario: ScenarioSpec, eq_config: EqualizerConfig, ebno_db: float,
                   seed: int, block: int) -> IterationTrace:
    """Transmit and receive one block with the generator derived from ``(seed, block)``."""
    channel = scenario.channel_spec(ebno_db)
    blk = transmit(scenario, channel, block_rng(seed, block))
    return run_turbo(scenario, eq_config, blk.received, blk.info, channel)
