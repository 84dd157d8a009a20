import numpy as np
import pytest

from wpansched.harness import SimConfig, build_network, make_flows
from wpansched.scheduler import sort_hops
from wpansched.topology import HopTransmission


@pytest.fixture(scope="session")
def cfg():
    return SimConfig()


def planned_instance(config, seed, beamwidth, flow_count):
    """Network plus first-superframe hops in packing order."""
    net = build_network(config, seed, beamwidth)
    flows = net.plan(make_flows(net, seed, flow_count, config.payload_range_bits))
    hops = sort_hops([h for f in flows for h in net.hops_of(f)], {f.id: 0 for f in flows})
    return net, flows, hops


def hop(flow, k, tx, rx, slots):
    return HopTransmission(flow, k, tx, rx, slots)


def conflict_from_pairs(n, pairs):
    m = np.eye(n, dtype=bool)
    for a, b in pairs:
        m[a, b] = m[b, a] = True
    return m


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
