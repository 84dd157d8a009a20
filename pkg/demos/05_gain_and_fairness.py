"""Concurrency gain and Jain fairness as the load grows (20 deg beams)."""
import numpy as np

from wpansched.harness import SimConfig, run_scenario
from wpansched.scheduler import Policy

cfg = SimConfig()
seeds = range(10)
print("flows   rho: mhct  f     e    | jain: mhct  f     e")
for nf in (1, 5, 10, 20, 30, 40, 50):
    recs = {p: [run_scenario(cfg, s, p, 20.0, nf).metrics for s in seeds] for p in Policy}
    rho = [np.mean([m.concurrency_gain for m in recs[p]]) for p in Policy]
    jain = [np.mean([m.jain_index for m in recs[p]]) for p in Policy]
    print(f"{nf:5d}        " + " ".join(f"{v:5.2f}" for v in rho) + "  |       "
          + " ".join(f"{v:5.3f}" for v in jain))
