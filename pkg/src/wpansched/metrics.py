"""Evaluation quantities computed from schedules."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .scheduler import ScheduleMap
from .topology import FlowRequest

CSV_COLUMNS = ("seed", "policy", "beamwidth_deg", "flow_count", "throughput_bps",
               "consumed_slots", "concurrency_gain", "jain_index")


@dataclass
class MetricsReport:
    network_throughput: float
    consumed_slots: int
    concurrency_gain: float | None
    jain_index: float | None
    per_flow_throughput: list[float] = field(default_factory=list)

    def csv_row(self, seed: int, policy: str, beamwidth_deg: float, flow_count: int) -> list[str]:
        return [str(seed), policy, _fmt(beamwidth_deg), str(flow_count),
                _fmt(self.network_throughput), str(self.consumed_slots),
                _fmt(self.concurrency_gain), _fmt(self.jain_index)]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x)) if isinstance(x, float) else str(x)


def completions(schedule: ScheduleMap, flows: Iterable[FlowRequest]) -> dict[int, int]:
    """Map flow id -> absolute end slot of its final hop, for delivered flows."""
    dest = {f.id: f.destination for f in flows}
    done = {}
    for hop, _, end in schedule.absolute():
        if dest.get(hop.flow_id) == hop.rx:
            done[hop.flow_id] = end
    return done


def network_throughput(schedule: ScheduleMap, flows: Sequence[FlowRequest],
                       superframe_duration_s: float) -> float:
    """End-to-end bits delivered by this superframe per second of superframe."""
    payload = {f.id: f.payload_bits for f in flows}
    delivered = sum(payload[fid] for fid in completions(schedule, flows))
    return delivered / superframe_duration_s


def slot_consumption(schedule: ScheduleMap) -> int:
    return sum(g.size_slots for g in schedule.groups)


def concurrency_gain(schedule: ScheduleMap, flows: Sequence[FlowRequest]) -> float | None:
    """Direct-link slot demand of the delivered flows over slots consumed."""
    done = completions(schedule, flows)
    consumed = slot_consumption(schedule)
    if not done or consumed == 0:
        return None
    direct = sum(f.direct_slots for f in flows if f.id in done)
    return direct / consumed


def jain_index(per_flow: Sequence[float]) -> float | None:
    x = np.asarray(per_flow, dtype=float)
    if x.size == 0 or not np.any(x > 0):
        return None
    x = x / x.max()  # scale first so tiny values cannot underflow when squared
    return float(x.sum() ** 2 / (x.size * (x ** 2).sum()))


def slot_shares(schedule: ScheduleMap) -> dict[int, float]:
    """Slots attributed to each flow when concurrent hops split each slot evenly.

    A hop running alone is charged its full duration; two hops overlapping
    for ``k`` slots are charged ``k/2`` each for that stretch.
    """
    shares: dict[int, float] = defaultdict(float)
    for g in schedule.groups:
        cuts = sorted({0, g.size_slots} | {p.offset for p in g.placements}
                      | {p.end for p in g.placements})
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            active = [p for p in g.placements if p.offset <= lo and p.end >= hi]
            for p in active:
                shares[p.hop.flow_id] += (hi - lo) / len(active)
    return dict(shares)
