"""Which past months does a query look at?

A query is a 1-based month index q. For window (W_y, W_m) the local set is
the W_m - 1 months just before q plus, for each earlier year, the W_m months
ending at q's calendar month. Each point is then placed on a
(year offset, month offset) grid with the query at (0, 0).
"""
import numpy as np

from jitlgpr import synth
from jitlgpr.jitl import WindowPair, encode, select_local

truth, _ = synth.generate(synth.SynthConfig(seed=42))
q, w = 109, WindowPair(4, 3)          # January of year 10 with a 4-year, 3-month window

idx = select_local(len(truth), q, w)
print(f"query {q} ({truth.date_at(q - 2)} is the last known month)")
print(f"window {w}: {len(idx)} points -> {idx}")

local = encode(idx, truth.values[np.array(idx) - 1], q)
print("\n index   date      year  month   demand")
for i, (yo, mo), d in zip(local.indices, local.offsets, local.demand):
    date = truth.date_at(i - 1)
    print(f"{i:6d}   {date.year}-{date.month:02d}  {yo:5.0f}  {mo:5.0f}  {d:8.2f}")

# Early queries have less history; out-of-range points are simply dropped.
short = select_local(49, 50, WindowPair(8, 3))
print(f"\nquery 50 with (8, 3): {len(short)} of {8 * 3 - 1} points available")
