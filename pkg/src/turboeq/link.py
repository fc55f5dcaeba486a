"""Transmitter-side link model: mapping, ISI filtering, AWGN and Eb/N0 calibration.

Noise convention: :class:`~turboeq.trellis.ChannelSpec` carries the complex
noise variance ``E|n|^2 = N0``, split equally between the real and imaginary
parts.  :func:`noise_variance_for` returns the per-real-dimension variance
``N0 / 2``; :meth:`ScenarioSpec.channel_spec` converts between the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .interleaving import Permutation, default_drp, load_permutation, random_permutation
from .outer_code import ConvCodeSpec
from .trellis import ChannelSpec

Modulation = Literal["bpsk", "16qam"]

BPSK = np.array([1.0 + 0j, -1.0 + 0j])

# Gray pair labels 00, 01, 10, 11 -> amplitude levels
_GRAY_LEVELS = {0b00: -3.0, 0b01: -1.0, 0b11: 1.0, 0b10: 3.0}


def qam16_gray() -> np.ndarray:
    """16QAM points indexed by 4-bit label; MSB pair picks I, LSB pair picks Q."""
    pts = np.empty(16, dtype=complex)
    for u in range(16):
        pts[u] = complex(_GRAY_LEVELS[u >> 2], _GRAY_LEVELS[u & 3])
    return pts / math.sqrt(10.0)


def constellation(modulation: Modulation) -> np.ndarray:
    if modulation == "bpsk":
        return BPSK.copy()
    if modulation == "16qam":
        return qam16_gray()
    raise ValueError(f"unknown modulation {modulation!r}")


def bits_per_symbol(modulation: Modulation) -> int:
    return {"bpsk": 1, "16qam": 4}[modulation]


def map_symbols(modulation: Modulation, bits) -> np.ndarray:
    """Map bits onto constellation points, ``K`` bits per symbol, first bit MSB."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    k = bits_per_symbol(modulation)
    if bits.size % k:
        raise ValueError(f"{bits.size} bits is not a multiple of {k} bits per symbol")
    labels = (bits.reshape(-1, k) << (k - 1 - np.arange(k))).sum(axis=1)
    return constellation(modulation)[labels]


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def apply_channel(spec: ChannelSpec, symbols, rng=None) -> np.ndarray:
    """ISI filter plus circular complex AWGN; output has ``len(symbols) + S`` samples."""
    x = np.asarray(symbols, dtype=complex).ravel()
    clean = np.convolve(x, spec.taps)
    gen = as_generator(rng)
    scale = math.sqrt(spec.noise_variance / 2.0)
    noise = scale * (gen.standard_normal(clean.size) + 1j * gen.standard_normal(clean.size))
    return clean + noise


def block_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one simulation block, derived from ``(seed, *key)``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    """One turbo-equalization system: code, interleaver, channel, mapper, block size.

    ``interleaver`` is ``"drp"`` (built-in DRP parameters), ``"random:<seed>"``
    or ``"file:<path>"`` (see :func:`~turboeq.interleaving.load_permutation`).
    """

    name: str
    taps: tuple
    modulation: Modulation
    info_bits: int
    code: ConvCodeSpec = field(default_factory=ConvCodeSpec)
    interleaver: str = "drp"
    iterations: int = 6
    ebno_grid: tuple = ()

    def __post_init__(self):
        if self.modulation not in ("bpsk", "16qam"):
            raise ValueError(f"unknown modulation {self.modulation!r}")
        if self.coded_bits % self.bits_per_symbol:
            raise ValueError("coded length is not a multiple of bits per symbol")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        perm = self.permutation()
        if perm.size != self.coded_bits:
            raise ValueError(f"interleaver size {perm.size} != coded length {self.coded_bits}")

    @property
    def bits_per_symbol(self) -> int:
        return bits_per_symbol(self.modulation)

    @property
    def coded_bits(self) -> int:
        return self.code.coded_length(self.info_bits)

    @property
    def n_symbols(self) -> int:
        return self.coded_bits // self.bits_per_symbol

    @property
    def rate(self) -> float:
        return self.info_bits / self.coded_bits

    @property
    def channel_gain(self) -> float:
        return float(np.sum(np.abs(np.asarray(self.taps, dtype=complex)) ** 2))

    @property
    def memory(self) -> int:
        return len(self.taps) - 1

    def permutation(self) -> Permutation:
        return _permutation_cached(self.interleaver, self.coded_bits)

    def channel_spec(self, ebno_db: float) -> ChannelSpec:
        """Receiver-side channel description at ``ebno_db`` (noise = ``N0``)."""
        return ChannelSpec(np.asarray(self.taps, dtype=complex),
                           2.0 * noise_variance_for(ebno_db, self),
                           self.bits_per_symbol, constellation(self.modulation))

    def with_(self, **changes) -> "ScenarioSpec":
        return replace(self, **changes)


_perm_cache: dict[tuple[str, int], Permutation] = {}


def _permutation_cached(kind: str, size: int) -> Permutation:
    key = (kind, size)
    if key not in _perm_cache:
        if kind == "drp":
            perm = default_drp(size)
        elif kind.startswith("random:"):
            perm = random_permutation(size, int(kind.split(":", 1)[1]))
        elif kind.startswith("file:"):
            perm = load_permutation(kind.split(":", 1)[1])
        else:
            raise ValueError(f"unknown interleaver {kind!r}")
        _perm_cache[key] = perm
    return _perm_cache[key]


def noise_variance_for(ebno_db: float, scenario: ScenarioSpec) -> float:
    """Per-real-dimension noise variance ``N0 / 2`` at the given Eb/N0.

    ``sigma^2 = Es * G / (2 * R * K * 10**(EbN0/10))`` with unit symbol
    energy, channel gain ``G = sum |h_j|^2`` and the code rate ``R``
    including the termination tail.
    """
    ebno = 10.0 ** (ebno_db / 10.0)
    return scenario.channel_gain / (2.0 * scenario.rate * scenario.bits_per_symbol * ebno)


SCENARIOS: dict[str, ScenarioSpec] = {
    "scenario1": ScenarioSpec(
        name="scenario1",
        taps=tuple(math.sqrt(v) for v in (0.45, 0.25, 0.15, 0.10, 0.05)),
        modulation="bpsk",
        info_bits=507,
        ebno_grid=(4.0, 5.0, 6.0, 7.0, 8.0),
    ),
    "scenario2": ScenarioSpec(
        name="scenario2",
        taps=(1.0, 1.0, 1.0),
        modulation="16qam",
        info_bits=2043,
        ebno_grid=(8.0, 9.0, 10.0, 11.0, 12.0),
    ),
}
