"""Seeded experiment runs, sweeps and CSV emission."""

from __future__ import annotations

import csv
import io
import logging
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .metrics import CSV_COLUMNS, MetricsReport, completions, jain_index, slot_shares
from .radio import (SPEED_OF_LIGHT, AntennaConfig, ConfigError, RadioParams, antennas_for_beamwidth,
                    dbm_per_mhz_to_w_per_hz)
from .scheduler import Policy, schedule_superframe
from .topology import FLOW_STREAM, FlowRequest, Network, _stream, generate_topology
from .waterfill import bound_throughput

log = logging.getLogger(__name__)

POLICIES = (Policy.MHCT, Policy.EMHCT_F, Policy.EMHCT_E)


@dataclass(frozen=True)
class SimConfig:
    node_count: int = 30
    room: tuple[float, float] = (16.0, 16.0)
    beamwidths: tuple[float, ...] = (20.0, 45.0, 90.0, 180.0)
    bandwidth_hz: float = 7e9
    tx_power_w: float = 1e-4
    antenna_gain_dbi: float = 12.0
    noise_density_dbm_mhz: float = -134.0
    path_loss_exponent: float = 3.0
    carrier_hz: float = 60e9
    payload_range_bits: tuple[int, int] = (50_000_000, 350_000_000)
    flow_counts: tuple[int, ...] = tuple(range(1, 51))
    seeds: tuple[int, ...] = tuple(range(10))
    payload_draws: int = 1
    maxslots: int = 1000
    slot_duration_s: float = 65.536e-6
    superframes_per_run: int = 20

    def __post_init__(self):
        errors = []
        if self.node_count < 2:
            errors.append("node_count")
        if len(self.room) != 2 or min(self.room) <= 0:
            errors.append("room")
        for name in ("bandwidth_hz", "tx_power_w", "carrier_hz", "slot_duration_s"):
            if not getattr(self, name) > 0:
                errors.append(name)
        if not 2 <= self.path_loss_exponent <= 6:
            errors.append("path_loss_exponent")
        lo, hi = self.payload_range_bits
        if not 0 < lo <= hi:
            errors.append("payload_range_bits")
        if not self.flow_counts or min(self.flow_counts) < 1:
            errors.append("flow_counts")
        if max(self.flow_counts, default=0) > self.node_count * (self.node_count - 1):
            errors.append("flow_counts")
        if not self.seeds:
            errors.append("seeds")
        for name in ("payload_draws", "maxslots", "superframes_per_run"):
            if getattr(self, name) < 1:
                errors.append(name)
        if not self.beamwidths:
            errors.append("beamwidths")
        for bw in self.beamwidths:
            try:
                antennas_for_beamwidth(bw)
            except ConfigError:
                errors.append("beamwidths")
        if errors:
            raise ConfigError("invalid config field(s): " + ", ".join(dict.fromkeys(errors)))

    @property
    def superframe_duration_s(self) -> float:
        return self.maxslots * self.slot_duration_s

    def radio(self) -> RadioParams:
        return RadioParams(
            bandwidth_hz=self.bandwidth_hz,
            tx_power_w=self.tx_power_w,
            noise_density_w_per_hz=dbm_per_mhz_to_w_per_hz(self.noise_density_dbm_mhz),
            path_loss_exponent=self.path_loss_exponent,
            wavelength_m=SPEED_OF_LIGHT / self.carrier_hz,
            slot_duration_s=self.slot_duration_s,
        )

    def antenna(self, beamwidth_deg: float) -> AntennaConfig:
        return AntennaConfig.from_beamwidth_deg(beamwidth_deg, self.antenna_gain_dbi)


_TUPLE_FIELDS = {"room": float, "beamwidths": float, "payload_range_bits": int,
                 "flow_counts": int, "seeds": int}


def _parse_list(text: str, kind) -> tuple:
    out = []
    for part in text.replace("x", ",").split(","):
        part = part.strip()
        if not part:
            continue
        if kind is int and ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(kind(float(part)) if kind is int else kind(part))
    return tuple(out)


def parse_config(text: str, base: SimConfig | None = None) -> SimConfig:
    """Read ``key = value`` lines; lists are comma separated, ``a..b`` is a range."""
    types = {f.name: f.type for f in fields(SimConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown field {key!r}")
        try:
            if key in _TUPLE_FIELDS:
                values[key] = _parse_list(val, _TUPLE_FIELDS[key])
            elif types[key] == "int":
                values[key] = int(float(val))
            else:
                values[key] = float(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    return replace(base or SimConfig(), **values)


def load_config(path: str | Path) -> SimConfig:
    return parse_config(Path(path).read_text())


@dataclass
class RunRecord:
    config: SimConfig
    seed: int
    policy: Policy
    beamwidth_deg: float
    flow_count: int
    metrics: MetricsReport
    wall_time_ms: float
    payload_draw: int = 0
    bound_bps: float | None = None
    superframes: list[int] = field(default_factory=list)  # consumed slots per superframe
    schedules: list = field(default_factory=list, repr=False)  # only when asked for
    gains: dict = field(default_factory=dict, repr=False)  # per-flow concurrency gain

    def csv_row(self) -> list[str]:
        return self.metrics.csv_row(self.seed, self.policy.value, self.beamwidth_deg,
                                    self.flow_count)


def make_flows(network: Network, seed: int, flow_count: int,
               payload_range: tuple[int, int], draw: int = 0) -> list[FlowRequest]:
    """Distinct random (source, destination) pairs with uniform payloads.

    The pair sequence for a seed is fixed, so ``k`` flows are always the first
    ``k`` of the ``k + 1`` flow instance.
    """
    n = len(network)
    if flow_count > n * (n - 1):
        raise ConfigError("flow_count exceeds the number of distinct node pairs")
    rng = _stream(seed, FLOW_STREAM, draw)
    order = rng.permutation(n * (n - 1))[:flow_count]
    payloads = rng.integers(payload_range[0], payload_range[1] + 1, size=n * (n - 1))
    flows = []
    for fid, (code, bits) in enumerate(zip(order, payloads)):
        src, k = divmod(int(code), n - 1)
        dst = k if k < src else k + 1
        bits = int(bits)
        flows.append(FlowRequest(fid, src, dst, bits, network.direct_slots(src, dst, bits)))
    return flows


def build_network(config: SimConfig, seed: int, beamwidth_deg: float) -> Network:
    nodes = generate_topology(config.node_count, config.room, seed)
    return Network(nodes, config.radio(), config.antenna(beamwidth_deg), config.room)


def simulate(network: Network, flows: Sequence[FlowRequest], policy: Policy | str,
             maxslots: int, superframes: int):
    """Run superframes until every flow is delivered or the run ends.

    Returns ``(per-superframe schedules, completion slot per delivered flow,
    accumulated slot shares per flow)``; completion slots are counted from the
    start of the run.
    """
    pending = list(flows)
    schedules = []
    finished: dict[int, int] = {}
    shares: dict[int, float] = defaultdict(float)
    for sf in range(superframes):
        if not pending:
            break
        schedule, carry = schedule_superframe(pending, policy, network, maxslots)
        schedules.append(schedule)
        for fid, end in completions(schedule, pending).items():
            finished[fid] = sf * maxslots + end
        for fid, s in slot_shares(schedule).items():
            shares[fid] += s
        pending = carry
    return schedules, finished, dict(shares)


def summarize(flows: Sequence[FlowRequest], schedules, finished: dict[int, int],
              maxslots: int, slot_duration_s: float) -> MetricsReport:
    consumed = [s.consumed_slots for s in schedules]
    busy = [k for k, c in enumerate(consumed) if c > 0]
    makespan = busy[-1] * maxslots + consumed[busy[-1]] if busy else 0
    delivered_bits = sum(f.payload_bits for f in flows if f.id in finished)
    throughput = delivered_bits / (makespan * slot_duration_s) if makespan else 0.0
    per_flow = [f.payload_bits / (finished[f.id] * slot_duration_s) if f.id in finished else 0.0
                for f in flows]
    total = sum(consumed)
    direct = sum(f.direct_slots for f in flows if f.id in finished)
    gain = direct / total if total and finished else None
    return MetricsReport(throughput, total, gain, jain_index(per_flow), per_flow)


def flow_gains(flows: Sequence[FlowRequest], finished: dict[int, int],
               shares: dict[int, float]) -> dict[int, float]:
    """Per-flow concurrency gain: direct-link slots over the slot share actually used."""
    return {f.id: f.direct_slots / shares[f.id] for f in flows
            if f.id in finished and shares.get(f.id, 0) > 0}


def waterfill_bound(network: Network, flows: Sequence[FlowRequest],
                    gains: dict[int, float], maxslots: int) -> float | None:
    """Water-filling throughput bound in bit/s from per-flow gains."""
    done = [f for f in flows if f.id in gains]
    if not done:
        return None
    rates = [network.rates[f.source, f.destination] for f in done]
    t = network.radio.slot_duration_s
    return bound_throughput([gains[f.id] for f in done], rates, maxslots, t) / (maxslots * t)


def run_scenario(config: SimConfig, seed: int, policy: Policy | str,
                 beamwidth_deg: float | None = None, flow_count: int | None = None,
                 payload_draw: int = 0, keep_schedules: bool = False) -> RunRecord:
    policy = Policy(policy)
    bw = config.beamwidths[0] if beamwidth_deg is None else beamwidth_deg
    nflows = config.flow_counts[-1] if flow_count is None else flow_count
    started = time.perf_counter()
    network = build_network(config, seed, bw)
    flows = make_flows(network, seed, nflows, config.payload_range_bits, payload_draw)
    schedules, finished, shares = simulate(network, flows, policy, config.maxslots,
                                           config.superframes_per_run)
    report = summarize(flows, schedules, finished, config.maxslots, config.slot_duration_s)
    gains = flow_gains(flows, finished, shares)
    bound = waterfill_bound(network, flows, gains, config.maxslots)
    elapsed = (time.perf_counter() - started) * 1e3
    return RunRecord(config, seed, policy, bw, nflows, report, elapsed, payload_draw, bound,
                     [s.consumed_slots for s in schedules],
                     schedules if keep_schedules else [], gains)


def _run_job(args) -> RunRecord:
    return run_scenario(*args)


def sweep_jobs(config: SimConfig, policies: Iterable[Policy | str]):
    policies = [Policy(p) for p in policies]
    return [(config, seed, pol, bw, nf, draw)
            for bw in config.beamwidths
            for nf in config.flow_counts
            for seed in config.seeds
            for draw in range(config.payload_draws)
            for pol in policies]


def run_sweep(config: SimConfig, policies: Iterable[Policy | str],
              workers: int = 1) -> list[RunRecord]:
    """Every (beamwidth, flow count, seed, draw, policy) combination, in canonical order."""
    jobs = sweep_jobs(config, policies)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            records = list(pool.map(_run_job, jobs, chunksize=8))
    else:
        records = [_run_job(j) for j in jobs]
    log.info("sweep finished: %d runs", len(records))
    return records


def _policy_order(p: Policy) -> int:
    return POLICIES.index(p)


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue(), newline="\n")


def records_csv(records: Sequence[RunRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(r.csv_row() for r in records)
    return buf.getvalue()


def _mean(values) -> float | None:
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else None


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def summary_rows(records: Sequence[RunRecord]) -> list[list[str]]:
    """Mean metrics per (policy, beamwidth, flow count)."""
    cells = defaultdict(list)
    for r in records:
        cells[(r.policy, r.beamwidth_deg, r.flow_count)].append(r)
    rows = []
    for (pol, bw, nf) in sorted(cells, key=lambda k: (_policy_order(k[0]), k[1], k[2])):
        rs = cells[(pol, bw, nf)]
        rows.append([pol.value, _fmt(bw), str(nf), str(len(rs)),
                     _fmt(_mean(r.metrics.network_throughput for r in rs)),
                     _fmt(_mean(r.metrics.consumed_slots for r in rs)),
                     _fmt(_mean(r.metrics.concurrency_gain for r in rs)),
                     _fmt(_mean(r.metrics.jain_index for r in rs)),
                     _fmt(_mean(r.bound_bps for r in rs))])
    return rows


SUMMARY_COLUMNS = ("policy", "beamwidth_deg", "flow_count", "runs", "throughput_bps",
                   "consumed_slots", "concurrency_gain", "jain_index", "waterfill_bps")


def write_sweep(records: Sequence[RunRecord], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runs = out / "runs.csv"
    runs.write_text(records_csv(records), newline="\n")
    summary = out / "summary.csv"
    _write_csv(summary, SUMMARY_COLUMNS, summary_rows(records))
    return [runs, summary] + emit_plot_data(records, out)


def _curve(records, beamwidth, metric) -> dict[int, dict[Policy, float | None]]:
    table = defaultdict(lambda: defaultdict(list))
    for r in records:
        if r.beamwidth_deg == beamwidth:
            table[r.flow_count][r.policy].append(metric(r))
    return {nf: {p: _mean(v) for p, v in by_pol.items()} for nf, by_pol in sorted(table.items())}


def emit_plot_data(records: Sequence[RunRecord], out_dir: str | Path) -> list[Path]:
    """One CSV per figure family: throughput per beamwidth, bound overlay, gain, fairness."""
    if not records:
        raise ValueError("no records to plot")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cols = [p.value.replace("-", "_") for p in POLICIES]
    written = []
    beamwidths = sorted({r.beamwidth_deg for r in records})
    for bw in beamwidths:
        curve = _curve(records, bw, lambda r: r.metrics.network_throughput)
        path = out / f"throughput_bw{_fmt_bw(bw)}.csv"
        _write_csv(path, ["flow_count", *cols],
                   [[nf, *(_fmt(row.get(p)) for p in POLICIES)] for nf, row in curve.items()])
        written.append(path)

    ref_bw = 20.0 if 20.0 in beamwidths else beamwidths[0]
    thr = _curve(records, ref_bw, lambda r: r.metrics.network_throughput)
    bound = _curve([r for r in records if r.policy is Policy.EMHCT_F], ref_bw,
                   lambda r: r.bound_bps)
    path = out / f"waterfill_bw{_fmt_bw(ref_bw)}.csv"
    _write_csv(path, ["flow_count", *cols, "waterfill"],
               [[nf, *(_fmt(row.get(p)) for p in POLICIES),
                 _fmt(bound.get(nf, {}).get(Policy.EMHCT_F))] for nf, row in thr.items()])
    written.append(path)

    for name, metric, suffix in (("concurrency_gain", lambda r: r.metrics.concurrency_gain, "_rho"),
                                 ("jain_index", lambda r: r.metrics.jain_index, "_jain")):
        curve = _curve(records, ref_bw, metric)
        path = out / f"{name}_bw{_fmt_bw(ref_bw)}.csv"
        _write_csv(path, ["flow_count", *(c + suffix for c in cols)],
                   [[nf, *(_fmt(row.get(p)) for p in POLICIES)] for nf, row in curve.items()])
        written.append(path)
    return written


def _fmt_bw(bw: float) -> str:
    return str(int(bw)) if float(bw).is_integer() else str(bw)


def config_snapshot(config: SimConfig) -> dict:
    return asdict(config)
