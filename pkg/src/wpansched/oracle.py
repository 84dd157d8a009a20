"""Exhaustive reference scheduler for tiny instances."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .topology import ConflictOracle, HopTransmission, build_conflict_graph

MAX_ORACLE_HOPS = 6


def brute_force_optimum(hops: Sequence[HopTransmission], oracle: ConflictOracle | None = None,
                        conflict: np.ndarray | None = None) -> int:
    """Shortest span over which ``hops`` can all be transmitted.

    Conflicting hops may not overlap in time and a hop may not start before
    the previous hop of its flow has ended. Hops are placed in order of start
    time; in a left-justified optimum every start is 0 or the end of a hop
    that started no later, so branching over those candidates is exhaustive.
    """
    n = len(hops)
    if n > MAX_ORACLE_HOPS:
        raise ValueError(f"brute force limited to {MAX_ORACLE_HOPS} hops, got {n}")
    if n == 0:
        return 0
    if conflict is None:
        if oracle is None:
            raise ValueError("need an oracle or a conflict matrix")
        conflict = build_conflict_graph(hops, oracle)
    conf = np.asarray(conflict, dtype=bool)
    slots = [h.slots for h in hops]
    index = {(h.flow_id, h.hop_index): i for i, h in enumerate(hops)}
    pred = [index.get((h.flow_id, h.hop_index - 1), -1) for h in hops]

    start = [-1] * n
    best = sum(slots)  # fully serial is always feasible

    def search(placed: int, last_start: int, span: int) -> None:
        nonlocal best
        if span >= best:
            return
        if placed == n:
            best = span
            return
        ends = {0} | {start[j] + slots[j] for j in range(n) if start[j] >= 0}
        for h in range(n):
            if start[h] >= 0 or (pred[h] >= 0 and start[pred[h]] < 0):
                continue
            floor = last_start
            if pred[h] >= 0:
                floor = max(floor, start[pred[h]] + slots[pred[h]])
            for t in sorted(e for e in ends if e >= floor):
                if any(start[j] >= 0 and conf[h, j]
                       and t < start[j] + slots[j] and start[j] < t + slots[h]
                       for j in range(n)):
                    continue
                start[h] = t
                search(placed + 1, t, max(span, t + slots[h]))
                start[h] = -1

    search(0, 0, 0)
    return best
