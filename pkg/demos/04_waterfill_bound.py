"""Comparing achieved throughput with the water-filling figure.

The per-flow concurrency gains measured under EMHCT-F feed a water-filling
split of one superframe; the result is set next to what each scheduler got.
"""
import numpy as np

from wpansched.harness import SimConfig, run_scenario
from wpansched.scheduler import Policy
from wpansched.waterfill import WaterfillProblem, solve_waterfill

# the solver on its own
sol = solve_waterfill(WaterfillProblem((1.0, 0.5, 0.1), 3.0))
print("gains 1, 0.5, 0.1 with 3 slots ->", np.round(sol.allocations, 3), "level", round(sol.water_level, 3))

cfg = SimConfig()
print("\n20 deg, mean of 6 seeds (Gb/s)")
print("flows  mhct  emhct-f  emhct-e  waterfill")
for nf in (5, 10, 20, 30, 40, 50):
    rec = {p: [run_scenario(cfg, s, p, 20.0, nf) for s in range(6)] for p in Policy}
    thr = [np.mean([r.metrics.network_throughput for r in rec[p]]) / 1e9 for p in Policy]
    bound = np.mean([r.bound_bps for r in rec[Policy.EMHCT_F]]) / 1e9
    print(f"{nf:5d} " + " ".join(f"{v:7.1f}" for v in thr) + f" {bound:9.1f}")
