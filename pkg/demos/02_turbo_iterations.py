"""Watching the turbo loop converge.

Runs the six equalize/decode iterations for a handful of scenario-1 blocks
and prints the information-bit errors after every iteration, for the exact
equalizer and two reduced ones at the same complexity (4 states).
"""

import numpy as np

from turboeq import EqualizerConfig, SCENARIOS, simulate_block

sc = SCENARIOS["scenario1"]
ebno = 4.0
blocks = range(40)

for cfg in (EqualizerConfig("exact"), EqualizerConfig("mstar", budget=4),
            EqualizerConfig("rs", reduced_memory=2)):
    errors = np.array([simulate_block(sc, cfg, ebno, seed=7, block=b).bit_errors for b in blocks])
    per_iter = errors.sum(axis=0)
    print(f"{cfg.label:<12} errors per iteration: {per_iter.tolist()}  "
          f"(blocks still in error at the end: {np.count_nonzero(errors[:, -1])}/{len(blocks)})")

# The same seed and block index reproduce a block exactly, whichever equalizer runs it,
# so the rows above compare the equalizers on identical noise.
