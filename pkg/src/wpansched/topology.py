"""Node placement, flow requests, multihop conversion and the conflict relation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .radio import AntennaConfig, ConfigError, RadioParams, link_rate, slots_required

TOPOLOGY_STREAM = 0
FLOW_STREAM = 1


@dataclass
class Node:
    id: int
    x: float
    y: float
    workload: int = 0

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class HopTransmission:
    flow_id: int
    hop_index: int  # 1-based
    tx: int
    rx: int
    slots: int
    priority: float = 0.0

    def __post_init__(self):
        if self.tx == self.rx:
            raise ValueError("hop transmitter and receiver must differ")
        if self.slots < 1:
            raise ValueError("hop needs at least one slot")


@dataclass(frozen=True)
class FlowRequest:
    """A source to destination transfer.

    ``position`` is the node currently holding the payload; it equals
    ``source`` until a partial delivery moves the payload onto a relay.
    ``direct_slots`` is always the cost of the original source to destination
    link and ``hop_path`` is the plan for the remaining distance.
    """

    id: int
    source: int
    destination: int
    payload_bits: int
    direct_slots: int = 0
    hop_path: tuple[int, ...] = ()
    miss_count: int = 0
    position: int | None = None

    def __post_init__(self):
        if self.source == self.destination:
            raise ValueError("flow source and destination must differ")
        if self.position is None:
            object.__setattr__(self, "position", self.source)

    def hops(self, rates: np.ndarray, slot_duration_s: float) -> list[HopTransmission]:
        """Expand ``hop_path`` into hop transmissions with slot counts."""
        path = self.hop_path
        return [
            HopTransmission(self.id, k + 1, a, b,
                            slots_required(self.payload_bits, rates[a, b], slot_duration_s))
            for k, (a, b) in enumerate(zip(path[:-1], path[1:]))
        ]


def _stream(seed: int, *tags: int) -> np.random.Generator:
    # PCG64 behind a SeedSequence keyed on (seed, stream tag, ...) so each
    # consumer owns an independent, reproducible stream.
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *tags])))


def generate_topology(node_count: int, room: tuple[float, float], seed: int) -> list[Node]:
    if node_count < 2:
        raise ConfigError(f"node_count must be >= 2, got {node_count}")
    width, height = room
    if width <= 0 or height <= 0:
        raise ConfigError("room dimensions must be positive")
    rng = _stream(seed, TOPOLOGY_STREAM)
    xy = rng.uniform(0.0, 1.0, size=(node_count, 2)) * np.array([width, height])
    return [Node(i, float(x), float(y)) for i, (x, y) in enumerate(xy)]


def positions_of(nodes: Sequence[Node]) -> np.ndarray:
    return np.array([[n.x, n.y] for n in nodes], dtype=float)


def distance_matrix(positions: np.ndarray) -> np.ndarray:
    diff = positions[:, None, :] - positions[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=-1))


def rate_matrix(positions: np.ndarray, radio: RadioParams, antenna: AntennaConfig) -> np.ndarray:
    """Pairwise interference-free link rates with both mainlobes aligned."""
    d = distance_matrix(positions)
    n = len(d)
    rates = np.zeros_like(d)
    g = antenna.mainlobe_gain
    for i in range(n):
        for j in range(n):
            if i != j:
                rates[i, j] = link_rate(d[i, j], radio, g, g)
    return rates


def link_weight(i: Node, j: Node, d_norm: float, f_norm: float) -> float:
    """Hop selection weight of the link i -> j."""
    d2 = (i.x - j.x) ** 2 + (i.y - j.y) ** 2
    return d2 / d_norm ** 2 + j.workload / f_norm


class _RouteGraph:
    """Complete directed graph whose edge weights are refreshed per search.

    The sparsity pattern never changes, so one CSR matrix is built up front
    and only its data array is rewritten; this keeps each Dijkstra call cheap.
    """

    def __init__(self, sq_dist: np.ndarray):
        n = len(sq_dist)
        off = ~np.eye(n, dtype=bool)
        self.sq = sq_dist
        self.cols = np.nonzero(off)[1]
        self.mask = off
        indptr = np.arange(n + 1) * (n - 1)
        self.graph = csr_matrix((np.ones(n * (n - 1)), self.cols, indptr), shape=(n, n))

    def shortest_path(self, src: int, dst: int, workload: np.ndarray, d_norm: float) -> list[int]:
        f_norm = float(workload.max()) or 1.0
        weights = self.sq[self.mask] / d_norm ** 2 + workload[self.cols] / f_norm
        # csgraph would drop a zero-weight edge, so floor at a tiny positive value
        self.graph.data[:] = np.maximum(weights, 1e-300)
        _, pred = dijkstra(self.graph, directed=True, indices=src, return_predecessors=True)
        path = [dst]
        while path[-1] != src:
            prev = pred[path[-1]]
            if prev < 0:
                raise ValueError(f"destination {dst} unreachable from {src}")
            path.append(int(prev))
        return path[::-1]


def _shortest_path(src: int, dst: int, sq_dist: np.ndarray, workload: np.ndarray,
                   d_norm: float) -> list[int]:
    return _RouteGraph(sq_dist).shortest_path(src, dst, workload, d_norm)


def plan_route(src: int, dst: int, payload_bits: int, sq_dist: np.ndarray, rates: np.ndarray,
               workload: np.ndarray, d_norm: float, slot_duration_s: float,
               graph: _RouteGraph | None = None) -> tuple[int, ...]:
    """Minimum-weight relay path, kept only if it beats the direct link in slots."""
    direct = slots_required(payload_bits, rates[src, dst], slot_duration_s)
    graph = graph or _RouteGraph(sq_dist)
    path = graph.shortest_path(src, dst, workload, d_norm)
    if len(path) > 2:
        total = sum(slots_required(payload_bits, rates[a, b], slot_duration_s)
                    for a, b in zip(path[:-1], path[1:]))
        if total < direct:
            return tuple(path)
    return (src, dst)


def convert_to_multihop(request: FlowRequest, nodes: Sequence[Node], radio: RadioParams,
                        antenna: AntennaConfig, d_norm: float) -> list[HopTransmission]:
    """Hop sequence for ``request`` starting from its current position.

    Node ids must equal their index in ``nodes``. Workloads are read from
    ``nodes`` and not updated here.
    """
    _check_ids(nodes)
    n = len(nodes)
    if not (0 <= request.position < n and 0 <= request.destination < n):
        raise ValueError("flow endpoints are not in the node list")
    pos = positions_of(nodes)
    rates = rate_matrix(pos, radio, antenna)
    workload = np.array([nd.workload for nd in nodes], dtype=float)
    path = plan_route(request.position, request.destination, request.payload_bits,
                      distance_matrix(pos) ** 2, rates, workload, d_norm, radio.slot_duration_s)
    return replace(request, hop_path=path).hops(rates, radio.slot_duration_s)


def _check_ids(nodes: Sequence[Node]) -> None:
    if any(nd.id != k for k, nd in enumerate(nodes)):
        raise ValueError("node ids must be 0..n-1 in list order")


def _angle_ok(cos_val: float, cos_half: float) -> bool:
    return cos_val >= cos_half - 1e-12


def _cos_between(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = math.hypot(*u), math.hypot(*v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v) / (nu * nv)


@dataclass(frozen=True)
class ConflictOracle:
    """Binary interference model for flat-top beams steered at each peer.

    Two hops conflict when they share a node, or when one transmitter's
    beam covers the other's receiver while that receiver's beam also
    covers the transmitter.
    """

    positions: np.ndarray
    beamwidth: float  # radians, same for every node
    _cos_half: float = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float))
        object.__setattr__(self, "_cos_half", math.cos(self.beamwidth / 2.0))

    @classmethod
    def from_nodes(cls, nodes: Sequence[Node], antenna: AntennaConfig) -> "ConflictOracle":
        return cls(positions_of(nodes), antenna.beamwidth)

    def _interferes(self, a: HopTransmission, b: HopTransmission) -> bool:
        p = self.positions
        at, ar, bt, br = p[a.tx], p[a.rx], p[b.tx], p[b.rx]
        return (_angle_ok(_cos_between(ar - at, br - at), self._cos_half)
                and _angle_ok(_cos_between(bt - br, at - br), self._cos_half))

    def conflicts(self, a: HopTransmission, b: HopTransmission) -> bool:
        if {a.tx, a.rx} & {b.tx, b.rx}:
            return True
        return self._interferes(a, b) or self._interferes(b, a)

    def matrix(self, tx: np.ndarray, rx: np.ndarray) -> np.ndarray:
        """Vectorised conflict adjacency for hops given by endpoint arrays."""
        tx = np.asarray(tx)
        rx = np.asarray(rx)
        shared = ((tx[:, None] == tx[None, :]) | (tx[:, None] == rx[None, :])
                  | (rx[:, None] == tx[None, :]) | (rx[:, None] == rx[None, :]))
        p = self.positions
        thr = self._cos_half - 1e-12
        u = _unit(p[rx] - p[tx])                         # beam of p's transmitter
        v = _unit(p[rx][None, :, :] - p[tx][:, None, :])  # p.tx -> q.rx
        w = _unit(p[tx] - p[rx])                         # beam of q's receiver
        z = _unit(p[tx][:, None, :] - p[rx][None, :, :])  # q.rx -> p.tx
        tx_cover = np.einsum("pk,pqk->pq", u, v) >= thr
        rx_cover = np.einsum("qk,pqk->pq", w, z) >= thr
        interf = tx_cover & rx_cover
        return shared | interf | interf.T


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return np.divide(v, n, out=np.zeros_like(v), where=n > 0)


def conflicts(a: HopTransmission, b: HopTransmission, oracle: ConflictOracle) -> bool:
    return oracle.conflicts(a, b)


def build_conflict_graph(hops: Sequence[HopTransmission], oracle: ConflictOracle) -> np.ndarray:
    if not hops:
        raise ValueError("need at least one hop")
    tx = np.array([h.tx for h in hops])
    rx = np.array([h.rx for h in hops])
    return oracle.matrix(tx, rx)


def dump_topology(nodes: Iterable[Node], path: str | Path) -> None:
    lines = [f"{n.id} {n.x!r} {n.y!r}\n" for n in nodes]
    Path(path).write_text("".join(lines), newline="\n")


def load_topology(path: str | Path) -> list[Node]:
    nodes = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        nid, x, y = line.split()
        nodes.append(Node(int(nid), float(x), float(y)))
    return nodes


class Network:
    """A placed set of nodes with precomputed link tables.

    Holds everything a superframe planner needs: pairwise rates, squared
    distances for the hop-selection weight, and the conflict oracle.
    """

    def __init__(self, nodes: Sequence[Node], radio: RadioParams, antenna: AntennaConfig,
                 room: tuple[float, float]):
        _check_ids(nodes)
        self.nodes = list(nodes)
        self.radio = radio
        self.antenna = antenna
        self.room = room
        self.d_norm = math.hypot(*room)
        pos = positions_of(self.nodes)
        self.sq_dist = distance_matrix(pos) ** 2
        self._routes = _RouteGraph(self.sq_dist)
        self.rates = rate_matrix(pos, radio, antenna)
        self.oracle = ConflictOracle(pos, antenna.beamwidth)

    def __len__(self) -> int:
        return len(self.nodes)

    def direct_slots(self, src: int, dst: int, payload_bits: int) -> int:
        return slots_required(payload_bits, self.rates[src, dst], self.radio.slot_duration_s)

    def hops_of(self, flow: FlowRequest) -> list[HopTransmission]:
        return flow.hops(self.rates, self.radio.slot_duration_s)

    def plan(self, flows: Iterable[FlowRequest]) -> list[FlowRequest]:
        """Route every flow from its current position, in id order.

        Node workloads start from zero and accumulate the slots of each
        planned path, so later flows steer around relays already in use.
        The final workloads are left on ``self.nodes``.
        """
        workload = np.zeros(len(self.nodes))
        out = []
        for f in sorted(flows, key=lambda f: f.id):
            path = plan_route(f.position, f.destination, f.payload_bits, self.sq_dist,
                              self.rates, workload, self.d_norm, self.radio.slot_duration_s,
                              self._routes)
            direct = f.direct_slots or self.direct_slots(f.source, f.destination, f.payload_bits)
            f = replace(f, hop_path=path, direct_slots=direct)
            for a, b in zip(path[:-1], path[1:]):
                s = slots_required(f.payload_bits, self.rates[a, b], self.radio.slot_duration_s)
                workload[a] += s
                workload[b] += s
            out.append(f)
        for node, w in zip(self.nodes, workload):
            node.workload = int(w)
        return out
