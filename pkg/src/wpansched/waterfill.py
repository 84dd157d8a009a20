"""Water-filling split of a slot budget across requests by concurrency gain."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class WaterfillProblem:
    gains: tuple[float, ...]
    budget: float

    def __post_init__(self):
        object.__setattr__(self, "gains", tuple(float(g) for g in self.gains))
        if not self.gains:
            raise ValueError("need at least one gain")
        if min(self.gains) <= 0 or not self.budget > 0:
            raise ValueError("gains and budget must be positive")


@dataclass(frozen=True)
class WaterfillSolution:
    allocations: np.ndarray
    water_level: float


def solve_waterfill(problem: WaterfillProblem) -> WaterfillSolution:
    """Allocate ``max(0, mu - 1/gain)`` to each request with the total equal to the budget.

    Requests are visited from the largest gain down; the active set shrinks
    from the tail until the level it implies clears every active floor.
    """
    floors = 1.0 / np.asarray(problem.gains)
    order = np.argsort(floors, kind="stable")
    sorted_floors = floors[order]
    csum = np.cumsum(sorted_floors)
    active = len(floors)
    while True:
        mu = (problem.budget + csum[active - 1]) / active
        if mu > sorted_floors[active - 1] or active == 1:
            break
        active -= 1
    alloc = np.maximum(mu - floors, 0.0)
    # inactive requests sit at or above the level; clamp rounding dust
    alloc[order[active:]] = 0.0
    return WaterfillSolution(alloc, float(mu))


def bound_throughput(gains: Sequence[float], rates_bps: Sequence[float], budget_slots: float,
                     slot_duration_s: float) -> float:
    """Bits per superframe if the budget were split by water-filling.

    Each request's slots are worth ``gain * rate`` bits per second: its
    direct-link rate scaled by the concurrency it enjoyed.
    """
    sol = solve_waterfill(WaterfillProblem(tuple(gains), budget_slots))
    eff = np.asarray(gains, dtype=float) * np.asarray(rates_bps, dtype=float)
    return float(np.sum(sol.allocations * slot_duration_s * eff))
