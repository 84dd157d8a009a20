"""Throughput against beamwidth for the three schedulers.

Narrow beams let more links run side by side. A few seeds keep this quick;
``wpansched sweep`` runs the full grid and writes the CSVs.
"""
import numpy as np

from wpansched.harness import SimConfig, run_scenario
from wpansched.scheduler import Policy

cfg = SimConfig()
seeds = range(8)
print("flows=40, mean over", len(seeds), "seeds (Gb/s)")
print("beam   " + "  ".join(f"{p.value:>8s}" for p in Policy))
for bw in cfg.beamwidths:
    row = [np.mean([run_scenario(cfg, s, p, bw, 40).metrics.network_throughput for s in seeds]) / 1e9
           for p in Policy]
    print(f"{bw:4.0f}   " + "  ".join(f"{v:8.1f}" for v in row))
