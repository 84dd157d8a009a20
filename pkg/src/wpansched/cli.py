"""Command line entry point: run, sweep, oracle, render."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .harness import (POLICIES, SimConfig, build_network, load_config, make_flows, records_csv,
                      run_scenario, run_sweep, write_sweep)
from .oracle import MAX_ORACLE_HOPS, brute_force_optimum
from .radio import ConfigError
from .scheduler import InvariantError, Policy, ScheduleMap, check_schedule, pack, sort_hops

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT = 0, 1, 2


def _config(args) -> SimConfig:
    cfg = load_config(args.config) if args.config else SimConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seeds"] = (args.seed,)
    if args.beamwidth is not None:
        overrides["beamwidths"] = (args.beamwidth,)
    if args.flows is not None:
        overrides["flow_counts"] = (args.flows,)
    return replace(cfg, **overrides) if overrides else cfg


def _emit(text: str, out: str | None, name: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_text(text, newline="\n")


def cmd_run(args) -> int:
    cfg = _config(args)
    policy = Policy(args.policy or Policy.EMHCT_F)
    record = run_scenario(cfg, cfg.seeds[0], policy, cfg.beamwidths[0], cfg.flow_counts[-1],
                          keep_schedules=True)
    network = build_network(cfg, record.seed, record.beamwidth_deg)
    for k, sched in enumerate(record.schedules):
        problems = check_schedule(sched, network.oracle)
        if problems:
            raise InvariantError(f"superframe {k}: " + "; ".join(problems))
    if args.format == "json":
        m = record.metrics
        doc = {
            "seed": record.seed, "policy": policy.value, "beamwidth_deg": record.beamwidth_deg,
            "flow_count": record.flow_count, "throughput_bps": m.network_throughput,
            "consumed_slots": m.consumed_slots, "concurrency_gain": m.concurrency_gain,
            "jain_index": m.jain_index, "waterfill_bps": record.bound_bps,
            "schedules": [s.to_dict() for s in record.schedules],
        }
        _emit(json.dumps(doc, indent=2) + "\n", args.out, "run.json")
    else:
        _emit(records_csv([record]), args.out, "run.csv")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config(args)
    policies = [Policy(args.policy)] if args.policy else list(POLICIES)
    records = run_sweep(cfg, policies, workers=args.workers)
    if args.out:
        for path in write_sweep(records, args.out):
            logging.info("wrote %s", path)
    elif args.format == "json":
        rows = [dict(zip(("seed", "policy", "beamwidth_deg", "flow_count"), r.csv_row()[:4]))
                | {"throughput_bps": r.metrics.network_throughput,
                   "consumed_slots": r.metrics.consumed_slots,
                   "concurrency_gain": r.metrics.concurrency_gain,
                   "jain_index": r.metrics.jain_index}
                for r in records]
        sys.stdout.write(json.dumps(rows, indent=2) + "\n")
    else:
        sys.stdout.write(records_csv(records))
    return EXIT_OK


def cmd_oracle(args) -> int:
    """Compare every policy against the exhaustive optimum on a small fixture."""
    cfg = _config(args)
    seed, bw = cfg.seeds[0], cfg.beamwidths[0]
    network = build_network(cfg, seed, bw)
    flows = network.plan(make_flows(network, seed, args.flows or 3, cfg.payload_range_bits))
    hops = sort_hops([h for f in flows for h in network.hops_of(f)], {f.id: 0 for f in flows})
    if len(hops) > MAX_ORACLE_HOPS:
        raise ConfigError(f"fixture has {len(hops)} hops; the oracle handles at most "
                          f"{MAX_ORACLE_HOPS} (try fewer --flows)")
    budget = sum(h.slots for h in hops)
    best = brute_force_optimum(hops, network.oracle)
    result = {"seed": seed, "beamwidth_deg": bw, "hops": len(hops), "optimum": best}
    for p in POLICIES:
        result[p.value] = pack(hops, network.oracle, budget, p).consumed_slots
    if args.format == "json":
        sys.stdout.write(json.dumps(result) + "\n")
    else:
        sys.stdout.write(",".join(result) + "\n" + ",".join(str(v) for v in result.values()) + "\n")
    if any(result[p.value] < best for p in POLICIES):
        raise InvariantError("a heuristic beat the exhaustive optimum")
    return EXIT_OK


def cmd_render(args) -> int:
    data = json.loads(Path(args.schedule).read_text())
    maps = data["schedules"] if "schedules" in data else [data]
    for k, m in enumerate(maps):
        if len(maps) > 1:
            sys.stdout.write(f"-- superframe {k}\n")
        sys.stdout.write(ScheduleMap.from_dict(m).gantt(args.width) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--seed", type=int)
    common.add_argument("--policy", choices=[p.value for p in Policy])
    common.add_argument("--beamwidth", type=float, metavar="DEG")
    common.add_argument("--flows", type=int, metavar="N")
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = argparse.ArgumentParser(prog="wpansched",
                                     description="Concurrent slot scheduling experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="one scenario").set_defaults(func=cmd_run)
    sw = sub.add_parser("sweep", parents=[common], help="full experiment grid")
    sw.add_argument("--workers", type=int, default=1)
    sw.set_defaults(func=cmd_sweep)
    sub.add_parser("oracle", parents=[common],
                   help="brute-force check on a small fixture").set_defaults(func=cmd_oracle)
    rd = sub.add_parser("render", help="text Gantt of a schedule JSON")
    rd.add_argument("schedule", metavar="JSON")
    rd.add_argument("--width", type=int, default=60)
    rd.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
