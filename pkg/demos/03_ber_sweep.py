"""A small BER sweep and the Eb/N0 needed for a target error rate.

Uses the same machinery as ``turboeq sweep``: simulate each (equalizer,
Eb/N0) point until enough errors are collected, write a CSV, read it back,
and interpolate where each curve crosses Pe = 1e-2 (with this few blocks,
lower targets run into points with no errors at all, which cannot be
interpolated on a log scale).  The stopping rule is
deliberately loose here so the script finishes in a minute or two; real
measurements should keep ``min_errors`` at 200 or more.
"""

import tempfile
from pathlib import Path

from turboeq import SCENARIOS
from turboeq.harness import SweepConfig, ebno_at_target, parse_equalizer, read_csv, run_sweep

cfg = SweepConfig(
    scenario=SCENARIOS["scenario1"],
    equalizers=[parse_equalizer(e) for e in ("mstar:4", "rs:2")],
    ebno_db=[3.0, 3.5, 4.0, 4.5],
    min_errors=50,
    max_blocks=300,
    seed=1,
    allow_low_min_errors=True,
)

out = Path(tempfile.mkdtemp()) / "sweep.csv"
cfg.output = str(out)
run_sweep(cfg)
records = [r for r in read_csv(out) if r.iteration == 6]

for algorithm in ("mstar", "rs"):
    curve = sorted((r.ebno_db, r.ber) for r in records if r.algorithm == algorithm)
    print(algorithm, " ".join(f"{x:.1f}dB:{p:.2e}" for x, p in curve))
    x, p = zip(*curve)
    print(f"  Eb/N0 at Pe=1e-2: {ebno_at_target(x, p, 1e-2):.2f} dB")

print("CSV written to", out)
