"""Monte-Carlo Eb/N0 sweeps, BER record I/O and sweep configuration files."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .equalizers import EqualizerConfig
from .link import SCENARIOS, ScenarioSpec
from .outer_code import ConvCodeSpec
from .turbo import simulate_block

log = logging.getLogger(__name__)

CSV_HEADER = ("scenario", "algorithm", "budget", "ebno_db", "iteration", "bit_errors", "bits",
              "frames", "frame_errors", "seed")

#: Monte-Carlo confidence floor on ``min_errors`` unless explicitly overridden.
MIN_ERRORS_FLOOR = 100


class ConfigError(ValueError):
    """Invalid sweep or scenario configuration."""


@dataclass(frozen=True)
class BerRecord:
    scenario: str
    algorithm: str
    budget: int
    ebno_db: float
    iteration: int
    bit_errors: int
    bits: int
    frames: int
    frame_errors: int
    seed: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else math.nan


@dataclass
class SweepConfig:
    """What to simulate and when to stop.

    A point stops once the final iteration has accumulated ``min_errors``
    information-bit errors or ``max_blocks`` blocks have been simulated.
    """

    scenario: ScenarioSpec
    equalizers: list[EqualizerConfig]
    ebno_db: list[float]
    min_errors: int = 200
    max_blocks: int = 10_000
    seed: int = 1
    output: str | None = None
    threads: int = 1
    allow_low_min_errors: bool = False

    def __post_init__(self):
        if not self.equalizers:
            raise ConfigError("no equalizers configured")
        if not self.ebno_db:
            raise ConfigError("empty Eb/N0 grid")
        if self.min_errors < MIN_ERRORS_FLOOR and not self.allow_low_min_errors:
            raise ConfigError(f"min_errors={self.min_errors} is below {MIN_ERRORS_FLOOR}; "
                              "set allow_low_min_errors to override")
        if self.max_blocks < 1:
            raise ConfigError("max_blocks must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        for cfg in self.equalizers:
            if cfg.algorithm == "rs" and cfg.reduced_memory > self.scenario.memory:
                raise ConfigError(f"{cfg.label} exceeds channel memory {self.scenario.memory}")


def state_budget(cfg: EqualizerConfig, scenario: ScenarioSpec) -> int:
    """Number of trellis states the equalizer keeps per depth."""
    full = 1 << (scenario.bits_per_symbol * scenario.memory)
    if cfg.algorithm == "exact":
        return full
    if cfg.algorithm == "rs":
        return 1 << (scenario.bits_per_symbol * cfg.reduced_memory)
    return min(cfg.budget, full)


def _run_block(args):
    scenario, cfg, ebno_db, seed, block = args
    return simulate_block(scenario, cfg, ebno_db, seed, block).bit_errors


def simulate_point(scenario: ScenarioSpec, cfg: EqualizerConfig, ebno_db: float, *, seed: int,
                   min_errors: int, max_blocks: int, pool=None, batch: int = 16) -> np.ndarray:
    """Per-block, per-iteration error counts for one operating point.

    Blocks are generated in index order and the stopping rule is applied in
    that order, so the result does not depend on how blocks were farmed out.
    At least one block is always simulated.  Returns an integer array of shape ``(n_blocks, iterations)``.
    """
    rows: list[list[int]] = []
    final_errors = 0
    next_block = 0
    mapper = map if pool is None else pool.map
    while next_block < max_blocks and (not rows or final_errors < min_errors):
        stop = min(max_blocks, next_block + batch)
        jobs = [(scenario, cfg, ebno_db, seed, b) for b in range(next_block, stop)]
        for row in mapper(_run_block, jobs):
            if rows and final_errors >= min_errors:
                break
            rows.append(row)
            final_errors += row[-1]
        next_block = stop
    return np.array(rows, dtype=np.int64).reshape(-1, scenario.iterations)


def run_sweep(cfg: SweepConfig) -> list[BerRecord]:
    """Simulate every (equalizer, Eb/N0) pair; one record per iteration index.

    Writes CSV to ``cfg.output`` when set.
    """
    if cfg.output is not None:
        _check_writable(cfg.output)
    sc = cfg.scenario
    records: list[BerRecord] = []
    pool = ProcessPoolExecutor(cfg.threads) if cfg.threads > 1 else None
    try:
        for eq in cfg.equalizers:
            budget = state_budget(eq, sc)
            for ebno in cfg.ebno_db:
                errs = simulate_point(sc, eq, ebno, seed=cfg.seed, min_errors=cfg.min_errors,
                                      max_blocks=cfg.max_blocks, pool=pool)
                n_blocks = errs.shape[0]
                for it in range(sc.iterations):
                    records.append(BerRecord(
                        sc.name, eq.algorithm, budget, float(ebno), it + 1,
                        int(errs[:, it].sum()), n_blocks * sc.info_bits, n_blocks,
                        int(np.count_nonzero(errs[:, it])), cfg.seed))
                log.info("%s %s Eb/N0=%.2f dB: %d blocks, final BER %.3g", sc.name, eq.label,
                         ebno, n_blocks, records[-1].ber)
    finally:
        if pool is not None:
            pool.shutdown()
    if cfg.output is not None:
        write_csv(records, cfg.output)
    return records


def _check_writable(path) -> None:
    parent = Path(path).resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise OSError(f"output path {path} is not writable")


def write_csv(records: Iterable[BerRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow([r.scenario, r.algorithm, r.budget, repr(r.ebno_db), r.iteration,
                        r.bit_errors, r.bits, r.frames, r.frame_errors, r.seed])


def read_csv(path) -> list[BerRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [BerRecord(row["scenario"], row["algorithm"], int(row["budget"]),
                          float(row["ebno_db"]), int(row["iteration"]), int(row["bit_errors"]),
                          int(row["bits"]), int(row["frames"]), int(row["frame_errors"]),
                          int(row["seed"])) for row in reader]


def ebno_at_target(ebno_db: Sequence[float], ber: Sequence[float], target: float) -> float:
    """Eb/N0 where the BER curve crosses ``target``, interpolating log10(BER) linearly.

    Uses the first pair of adjacent points that brackets the target.  Returns
    ``nan`` when no pair does (including when a bracketing point has zero
    errors, which has no logarithm).
    """
    x = np.asarray(ebno_db, dtype=float)
    p = np.asarray(ber, dtype=float)
    order = np.argsort(x)
    x, p = x[order], p[order]
    lt = math.log10(target)
    for i in range(len(x) - 1):
        if p[i] >= target > p[i + 1] or p[i] > target >= p[i + 1]:
            if p[i + 1] <= 0:
                # crossing into an error-free point: no log-linear estimate possible
                return math.nan
            y0, y1 = math.log10(p[i]), math.log10(p[i + 1])
            return float(x[i] + (lt - y0) * (x[i + 1] - x[i]) / (y1 - y0))
    return math.nan


# --- configuration files -------------------------------------------------

_SCENARIO_KEYS = {f.name for f in fields(ScenarioSpec)}
_CODE_KEYS = {"memory", "feedback", "feedforward", "terminated"}
_SWEEP_KEYS = {f.name for f in fields(SweepConfig)}


def _parse_poly(v) -> int:
    if isinstance(v, str):
        return int(v, 8)
    return int(v)


def scenario_from_dict(d: dict) -> ScenarioSpec:
    unknown = set(d) - _SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    d = dict(d)
    try:
        if "code" in d:
            code = d["code"]
            bad = set(code) - _CODE_KEYS
            if bad:
                raise ConfigError(f"unknown code keys: {sorted(bad)}")
            code = dict(code)
            for key in ("feedback", "feedforward"):
                if key in code:
                    code[key] = _parse_poly(code[key])
            d["code"] = ConvCodeSpec(**code)
        d["taps"] = tuple(complex(*t) if isinstance(t, (list, tuple)) else float(t)
                          for t in d.get("taps", ()))
        d["ebno_grid"] = tuple(float(v) for v in d.get("ebno_grid", ()))
        return ScenarioSpec(**d)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def parse_equalizer(spec) -> EqualizerConfig:
    """``"exact"``, ``"mstar:4"``, ``"m:2"``, ``"rs:2"`` (S') or a dict of fields."""
    try:
        if isinstance(spec, dict):
            bad = set(spec) - {"algorithm", "budget", "reduced_memory"}
            if bad:
                raise ConfigError(f"unknown equalizer keys: {sorted(bad)}")
            return EqualizerConfig(**spec)
        name, _, arg = str(spec).partition(":")
        if name == "exact":
            return EqualizerConfig("exact")
        if name == "rs":
            return EqualizerConfig("rs", reduced_memory=int(arg))
        return EqualizerConfig(name, budget=int(arg))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid equalizer {spec!r}: {exc}") from exc


def sweep_from_dict(d: dict) -> SweepConfig:
    unknown = set(d) - _SWEEP_KEYS
    if unknown:
        raise ConfigError(f"unknown sweep keys: {sorted(unknown)}")
    if "scenario" not in d or "equalizers" not in d:
        raise ConfigError("sweep config needs 'scenario' and 'equalizers'")
    d = dict(d)
    sc = d["scenario"]
    if isinstance(sc, str):
        if sc not in SCENARIOS:
            raise ConfigError(f"unknown scenario {sc!r}; known: {sorted(SCENARIOS)}")
        sc = SCENARIOS[sc]
    elif isinstance(sc, dict):
        sc = scenario_from_dict(sc)
    else:
        raise ConfigError("scenario must be a name or a table")
    d["scenario"] = sc
    d["equalizers"] = [parse_equalizer(e) for e in d["equalizers"]]
    d["ebno_db"] = [float(v) for v in d.get("ebno_db", sc.ebno_grid)]
    try:
        return SweepConfig(**d)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_sweep_config(path) -> SweepConfig:
    """Load a JSON sweep file; unknown keys anywhere are errors."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    return sweep_from_dict(raw)


def scenario_summary(sc: ScenarioSpec) -> dict:
    return {
        "name": sc.name, "modulation": sc.modulation, "taps": [complex(t).real if complex(t).imag == 0
                                                                else [complex(t).real, complex(t).imag]
                                                                for t in sc.taps],
        "memory": sc.memory, "states": 1 << (sc.bits_per_symbol * sc.memory),
        "info_bits": sc.info_bits, "coded_bits": sc.coded_bits, "interleaver": sc.interleaver,
        "iterations": sc.iterations,
        "code": {"memory": sc.code.memory, "feedback": f"{sc.code.feedback:o}",
                 "feedforward": f"{sc.code.feedforward:o}"},
    }
