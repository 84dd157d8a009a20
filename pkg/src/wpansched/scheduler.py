"""Concurrent time-slot allocation for one superframe.

Three policies share one packing engine:

* ``MHCT`` groups mutually compatible hops; every hop in a group starts at
  the group's first slot and the group lasts as long as its longest hop.
* ``EMHCT_F`` additionally moves hops into the unused tail of earlier groups,
  behind the members they conflict with, without changing any group's size.
* ``EMHCT_E`` does the same but may stretch a group, paying for the growth
  either from the remaining superframe budget (hops not yet scheduled) or
  from the slots freed where the moved hop came from.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .topology import ConflictOracle, FlowRequest, HopTransmission, Network, build_conflict_graph

AGING_STEP = 0.25
TOP_RANK_MISSES = 4


class Policy(str, Enum):
    MHCT = "mhct"
    EMHCT_F = "emhct-f"
    EMHCT_E = "emhct-e"


@dataclass(frozen=True)
class Placement:
    hop: HopTransmission
    offset: int

    @property
    def end(self) -> int:
        return self.offset + self.hop.slots


@dataclass
class Group:
    index: int
    start_slot: int
    size_slots: int
    placements: list[Placement] = field(default_factory=list)


@dataclass
class ScheduleMap:
    groups: list[Group]
    maxslots: int

    @property
    def consumed_slots(self) -> int:
        return sum(g.size_slots for g in self.groups)

    def absolute(self) -> Iterable[tuple[HopTransmission, int, int]]:
        """Yield ``(hop, start, end)`` in absolute superframe slots."""
        for g in self.groups:
            for p in g.placements:
                yield p.hop, g.start_slot + p.offset, g.start_slot + p.end

    def hops(self) -> list[HopTransmission]:
        return [p.hop for g in self.groups for p in g.placements]

    def to_dict(self) -> dict:
        return {
            "maxslots": self.maxslots,
            "consumed_slots": self.consumed_slots,
            "groups": [
                {
                    "index": g.index,
                    "start_slot": g.start_slot,
                    "size_slots": g.size_slots,
                    "placements": [
                        {"flow": p.hop.flow_id, "hop": p.hop.hop_index, "tx": p.hop.tx,
                         "rx": p.hop.rx, "offset": p.offset, "slots": p.hop.slots}
                        for p in g.placements
                    ],
                }
                for g in self.groups
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScheduleMap":
        groups = []
        for g in data["groups"]:
            placements = [
                Placement(HopTransmission(p["flow"], p["hop"], p["tx"], p["rx"], p["slots"]),
                          p["offset"])
                for p in g["placements"]
            ]
            groups.append(Group(g["index"], g["start_slot"], g["size_slots"], placements))
        return cls(groups, data["maxslots"])

    def gantt(self, width: int = 60) -> str:
        """Fixed-width text chart, one row per group.

        Each cell shows how many hops are on air in that stretch of the
        group (``+`` for ten or more); members are listed with their
        ``[offset, end)`` window.
        """
        lines = [f"consumed {self.consumed_slots}/{self.maxslots} slots"]
        scale = width / max((g.size_slots for g in self.groups), default=1)
        for g in self.groups:
            active = np.zeros(width, dtype=int)
            for p in g.placements:
                lo = int(p.offset * scale)
                active[lo:max(int(p.end * scale), lo + 1)] += 1
            cells = "".join(" " if a == 0 else (str(a) if a < 10 else "+") for a in active)
            members = " ".join(f"f{p.hop.flow_id}.{p.hop.hop_index}[{p.offset},{p.end})"
                               for p in g.placements)
            lines.append(f"G{g.index:<3d}@{g.start_slot:>6d} +{g.size_slots:<5d}|{cells}| {members}")
        return "\n".join(lines)


def effective_priority(slots: int, misses: int) -> float:
    return slots * (1.0 + AGING_STEP * min(misses, TOP_RANK_MISSES))


def _sort_key(hop: HopTransmission, misses: int):
    starving = misses >= TOP_RANK_MISSES
    return (0 if starving else 1, -misses if starving else 0,
            -effective_priority(hop.slots, misses), hop.flow_id, hop.hop_index)


def sort_hops(hops: Sequence[HopTransmission],
              miss_counts: Mapping[int, int] | None = None) -> list[HopTransmission]:
    """Order hops for packing: longest first, with aged flows pulled forward.

    A flow that has missed ``TOP_RANK_MISSES`` superframes in a row sorts
    ahead of every flow that has missed fewer.
    """
    miss_counts = miss_counts or {}
    keyed = sorted(hops, key=lambda h: _sort_key(h, miss_counts.get(h.flow_id, 0)))
    return [replace(h, priority=effective_priority(h.slots, miss_counts.get(h.flow_id, 0)))
            for h in keyed]


def age_priorities(miss_counts: Mapping[int, int], missed_flows: Iterable[int]) -> dict[int, int]:
    """Bump the miss counter of missed flows and reset everyone else."""
    missed = set(missed_flows)
    return {fid: (m + 1 if fid in missed else 0) for fid, m in miss_counts.items()}


class _Packer:
    """Index-based working state; hops are referred to by their rank."""

    def __init__(self, hops: Sequence[HopTransmission], conflict: np.ndarray, maxslots: int):
        n = len(hops)
        self.hops = hops
        self.slots = [h.slots for h in hops]
        self.conf = np.asarray(conflict, dtype=bool).tolist()
        self.maxslots = maxslots
        rank = {(h.flow_id, h.hop_index): i for i, h in enumerate(hops)}
        self.pred = [rank.get((h.flow_id, h.hop_index - 1), -1) for h in hops]
        self.succ = [rank.get((h.flow_id, h.hop_index + 1), -1) for h in hops]
        self.group_of = [-1] * n
        self.offset = [0] * n
        self.groups: list[list[int]] = []
        self.sizes: list[int] = []
        self.consumed = 0

    # -- bookkeeping -------------------------------------------------------
    def _place(self, h: int, g: int, offset: int) -> None:
        self.groups[g].append(h)
        self.group_of[h] = g
        self.offset[h] = offset
        end = offset + self.slots[h]
        if end > self.sizes[g]:
            self.consumed += end - self.sizes[g]
            self.sizes[g] = end

    def _fitted_size(self, g: int, without: int = -1) -> int:
        return max((self.offset[m] + self.slots[m] for m in self.groups[g] if m != without),
                   default=0)

    def _remove(self, h: int) -> None:
        g = self.group_of[h]
        self.groups[g].remove(h)
        self.group_of[h] = -1
        new = self._fitted_size(g)
        self.consumed -= self.sizes[g] - new
        self.sizes[g] = new

    def _trim(self) -> None:
        for g in range(len(self.groups)):
            new = self._fitted_size(g)
            self.consumed -= self.sizes[g] - new
            self.sizes[g] = new

    def _free_of_conflict(self, h: int, g: int) -> bool:
        row = self.conf[h]
        return not any(row[m] for m in self.groups[g])

    # -- passes -------------------------------------------------------------
    def grouping_pass(self) -> bool:
        """Left-aligned greedy grouping of every hop not yet placed."""
        open_hops = [i for i, g in enumerate(self.group_of) if g < 0]
        if not open_hops:
            return False
        pending = set(open_hops)
        largest = [(-self.slots[i], i) for i in open_hops]
        heapq.heapify(largest)
        ready = [i for i in open_hops if self.pred[i] < 0 or self.group_of[self.pred[i]] >= 0]
        heapq.heapify(ready)
        progress = False
        while ready:
            h = heapq.heappop(ready)
            s = self.slots[h]
            lo = self.group_of[self.pred[h]] + 1 if self.pred[h] >= 0 else 0
            target = -1
            for g in range(lo, len(self.groups)):
                if self.sizes[g] >= s and self._free_of_conflict(h, g):
                    target = g
                    break
            if target < 0:
                budget = self.maxslots - self.consumed
                if s <= budget:
                    while largest[0][1] not in pending:
                        heapq.heappop(largest)
                    capacity = max(s, min(-largest[0][0], budget))
                    self.groups.append([])
                    self.sizes.append(capacity)
                    self.consumed += capacity
                    target = len(self.groups) - 1
            pending.discard(h)
            if target >= 0:
                self._place(h, target, 0)
                progress = True
                nxt = self.succ[h]
                if nxt >= 0 and nxt in pending:
                    heapq.heappush(ready, nxt)
        self._trim()
        return progress

    def span_pass(self, expandable: bool) -> bool:
        """Pull later or unplaced hops into earlier groups behind their conflicts."""
        changed = False
        n = len(self.hops)
        for t in range(len(self.groups)):
            if not self.groups[t]:
                continue
            for h in range(n):
                home = self.group_of[h]
                if 0 <= home <= t:
                    continue
                p = self.pred[h]
                if p >= 0 and not 0 <= self.group_of[p] <= t:
                    continue
                s = self.slots[h]
                size_t = self.sizes[t]
                if not expandable and s > size_t:
                    continue
                row = self.conf[h]
                start = 0
                for m in self.groups[t]:
                    if row[m]:
                        end = self.offset[m] + self.slots[m]
                        if end > start:
                            start = end
                growth = start + s - size_t
                if growth > 0:
                    if not expandable:
                        continue
                    if home >= 0:
                        # a scheduled hop may only stretch a group if the map gets shorter
                        if growth >= self.sizes[home] - self._fitted_size(home, without=h):
                            continue
                    elif growth > self.maxslots - self.consumed:
                        continue
                if home >= 0:
                    self._remove(h)
                self._place(h, t, start)
                changed = True
        return changed

    def run(self, policy: Policy) -> None:
        while True:
            progress = self.grouping_pass()
            if policy is not Policy.MHCT:
                progress = self.span_pass(policy is Policy.EMHCT_E) or progress
            if not progress or all(g >= 0 for g in self.group_of):
                break

    def to_schedule(self) -> ScheduleMap:
        groups = []
        start = 0
        for g, members in enumerate(self.groups):
            if not members:
                continue
            placements = [Placement(self.hops[m], self.offset[m])
                          for m in sorted(members, key=lambda m: (self.offset[m], m))]
            groups.append(Group(len(groups) + 1, start, self.sizes[g], placements))
            start += self.sizes[g]
        return ScheduleMap(groups, self.maxslots)


def _conflict_matrix(hops: Sequence[HopTransmission], oracle: ConflictOracle,
                     conflict: np.ndarray | None) -> np.ndarray:
    if conflict is not None:
        return conflict
    if not hops:
        return np.zeros((0, 0), dtype=bool)
    return build_conflict_graph(hops, oracle)


def pack(hops: Sequence[HopTransmission], oracle: ConflictOracle | None, maxslots: int,
         policy: Policy | str, conflict: np.ndarray | None = None) -> ScheduleMap:
    """Schedule ``hops`` (already in priority order) under ``policy``.

    ``conflict`` may carry a precomputed adjacency aligned with ``hops``;
    otherwise it is built from ``oracle``.
    """
    if maxslots < 1:
        raise ValueError("maxslots must be positive")
    packer = _Packer(hops, _conflict_matrix(hops, oracle, conflict), maxslots)
    packer.run(Policy(policy))
    return packer.to_schedule()


def mhct_schedule(hops, oracle, maxslots, conflict=None) -> ScheduleMap:
    return pack(hops, oracle, maxslots, Policy.MHCT, conflict)


def emhct_f_schedule(hops, oracle, maxslots, conflict=None) -> ScheduleMap:
    return pack(hops, oracle, maxslots, Policy.EMHCT_F, conflict)


def emhct_e_schedule(hops, oracle, maxslots, conflict=None) -> ScheduleMap:
    return pack(hops, oracle, maxslots, Policy.EMHCT_E, conflict)


def schedule_superframe(flows: Sequence[FlowRequest], policy: Policy | str, network: Network,
                        maxslots: int) -> tuple[ScheduleMap, list[FlowRequest]]:
    """Plan, order and pack one superframe.

    Returns the schedule and the flows still in transit, with their payload
    moved to the last relay reached, their remaining path re-planned and
    their miss counters aged. Flows whose final hop was scheduled are dropped.
    """
    planned = network.plan(flows)
    hops = [h for f in planned for h in network.hops_of(f)]
    ordered = sort_hops(hops, {f.id: f.miss_count for f in planned})
    schedule = pack(ordered, network.oracle, maxslots, policy)

    reached: dict[int, int] = {}
    for hop in schedule.hops():
        if hop.hop_index > reached.get(hop.flow_id, 0):
            reached[hop.flow_id] = hop.hop_index
    # a flow misses whenever any of its remaining hops is left out
    missed = {f.id for f in planned if reached.get(f.id, 0) < len(f.hop_path) - 1}
    misses = age_priorities({f.id: f.miss_count for f in planned}, missed)
    carry = [replace(f, position=f.hop_path[reached.get(f.id, 0)], miss_count=misses[f.id])
             for f in planned if f.id in missed]
    if carry:
        carry = network.plan(carry)
    return schedule, carry


class InvariantError(RuntimeError):
    """A schedule broke one of the structural rules every policy must keep."""


def check_schedule(schedule: ScheduleMap, oracle: ConflictOracle) -> list[str]:
    """List every rule the schedule breaks; empty means valid.

    Rules: conflicting hops never overlap in time, hops of a flow run in
    order, the map fits the superframe, groups are contiguous and each group
    is exactly as long as its longest-running member.
    """
    problems = []
    if schedule.consumed_slots > schedule.maxslots:
        problems.append(f"consumed {schedule.consumed_slots} > maxslots {schedule.maxslots}")
    start = 0
    for g in schedule.groups:
        if g.start_slot != start:
            problems.append(f"group {g.index} starts at {g.start_slot}, expected {start}")
        start = g.start_slot + g.size_slots
        if not g.placements:
            problems.append(f"group {g.index} is empty")
            continue
        if min(p.offset for p in g.placements) < 0:
            problems.append(f"group {g.index} has a negative offset")
        if max(p.end for p in g.placements) != g.size_slots:
            problems.append(f"group {g.index} size {g.size_slots} != longest member")
    spans = list(schedule.absolute())
    for i, (a, a0, a1) in enumerate(spans):
        for b, b0, b1 in spans[i + 1:]:
            if a0 < b1 and b0 < a1 and oracle.conflicts(a, b):
                problems.append(f"conflicting f{a.flow_id}.{a.hop_index} and "
                                f"f{b.flow_id}.{b.hop_index} overlap")
    ends = {(h.flow_id, h.hop_index): (s, e) for h, s, e in spans}
    by_flow: dict[int, list[int]] = {}
    for fid, k in ends:
        by_flow.setdefault(fid, []).append(k)
    for fid, idx in by_flow.items():
        # earlier hops may have run in a previous superframe; only gaps matter
        idx.sort()
        if idx[-1] - idx[0] + 1 != len(idx):
            problems.append(f"flow {fid} skips a hop")
        for k in idx[1:]:
            if (fid, k - 1) in ends and ends[(fid, k)][0] < ends[(fid, k - 1)][1]:
                problems.append(f"flow {fid} hop {k} starts before hop {k - 1} ends")
    return problems
