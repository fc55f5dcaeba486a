"""DRP (dithered relative-prime) interleavers and permutation helpers.

A permutation is stored as its forward image array.  ``interleave`` reads
the input in permuted order, ``out[i] = seq[forward[i]]``; ``deinterleave``
undoes it exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from os import PathLike

import numpy as np

GOLDEN = (1 + math.sqrt(5)) / 2

#: Default length-8 dither patterns for the built-in DRP interleavers.
DEFAULT_READ_DITHER = (5, 2, 7, 0, 3, 6, 1, 4)
DEFAULT_WRITE_DITHER = (2, 7, 4, 1, 6, 3, 0, 5)


@dataclass(frozen=True, eq=False)
class Permutation:
    forward: np.ndarray

    def __post_init__(self):
        fwd = np.asarray(self.forward, dtype=np.int64).ravel()
        if not np.array_equal(np.sort(fwd), np.arange(fwd.size)):
            raise ValueError("forward map is not a bijection on [0, size)")
        fwd.setflags(write=False)
        object.__setattr__(self, "forward", fwd)

    @property
    def size(self) -> int:
        return self.forward.size

    @property
    def inverse(self) -> np.ndarray:
        inv = np.empty_like(self.forward)
        inv[self.forward] = np.arange(self.size)
        return inv

    def spread(self) -> int:
        """Minimum cyclic distance between the images of adjacent positions."""
        d = np.abs(np.diff(self.forward))
        return int(np.min(np.minimum(d, self.size - d)))

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(self.forward, other.forward)


def _dither_map(dither, n: int) -> np.ndarray:
    dither = np.asarray(dither, dtype=np.int64)
    w = dither.size
    if n % w:
        raise ValueError(f"dither length {w} does not divide size {n}")
    if not np.array_equal(np.sort(dither), np.arange(w)):
        raise ValueError("dither must be a permutation of range(len(dither))")
    i = np.arange(n)
    return w * (i // w) + dither[i % w]


def make_drp(size: int, read_dither=(0,), write_dither=(0,), prime: int = 1,
             offset: int = 0) -> Permutation:
    """Dithered relative-prime permutation.

    ``forward[i] = W(offset + R(i) * prime mod size)`` where ``R`` and ``W``
    apply the read and write dithers blockwise.
    """
    if math.gcd(prime, size) != 1:
        raise ValueError(f"prime {prime} is not coprime with size {size}")
    read = _dither_map(read_dither, size)
    write = _dither_map(write_dither, size)
    return Permutation(write[(offset + read * prime) % size])


def default_prime(size: int) -> int:
    """Integer nearest ``size / golden ratio`` that is coprime with ``size``."""
    base = round(size / GOLDEN)
    for delta in range(size):
        for p in (base + delta, base - delta):
            if 1 < p < size and math.gcd(p, size) == 1:
                return p
    raise ValueError(f"no usable prime for size {size}")


def default_drp(size: int) -> Permutation:
    """The DRP interleaver used by the built-in scenarios."""
    return make_drp(size, DEFAULT_READ_DITHER, DEFAULT_WRITE_DITHER, default_prime(size), 0)


def random_permutation(size: int, seed: int) -> Permutation:
    """Uniform random permutation, for interleaver sensitivity checks."""
    return Permutation(np.random.default_rng(seed).permutation(size))


def interleave(p: Permutation, seq) -> np.ndarray:
    seq = np.asarray(seq)
    if seq.shape[0] != p.size:
        raise ValueError(f"sequence length {seq.shape[0]} != permutation size {p.size}")
    return seq[p.forward]


def deinterleave(p: Permutation, seq) -> np.ndarray:
    seq = np.asarray(seq)
    if seq.shape[0] != p.size:
        raise ValueError(f"sequence length {seq.shape[0]} != permutation size {p.size}")
    out = np.empty_like(seq)
    out[p.forward] = seq
    return out


def load_permutation(path: str | PathLike) -> Permutation:
    """Read whitespace-separated forward images, one per position."""
    with open(path) as fh:
        values = fh.read().split()
    return Permutation(np.array([int(v) for v in values], dtype=np.int64))


def save_permutation(p: Permutation, path: str | PathLike) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(str(int(v)) for v in p.forward) + "\n")
