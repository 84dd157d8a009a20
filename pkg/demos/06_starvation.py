"""Priority aging keeps a small flow from starving.

Every superframe two fresh 480-slot transfers through a hub arrive and fill
almost the whole superframe. A 50-slot flow through the same hub keeps
losing out until its miss counter reaches four, at which point it jumps the
queue.
"""
from wpansched.radio import AntennaConfig, RadioParams
from wpansched.scheduler import Policy, schedule_superframe
from wpansched.topology import FlowRequest, Network, Node

pts = [(8.0, 8.0), (9.0, 8.0), (8.0, 9.2), (6.8, 8.0)]
net = Network([Node(k, x, y) for k, (x, y) in enumerate(pts)], RadioParams(),
              AntennaConfig.from_beamwidth_deg(20), (16.0, 16.0))
t = net.radio.slot_duration_s


def payload(a, b, slots):
    return int(slots * net.rates[a, b] * t)


pending = [FlowRequest(0, 0, 1, payload(0, 1, 50))]
next_id = 1
for sf in range(8):
    fresh = [FlowRequest(next_id, 0, 2, payload(0, 2, 480)),
             FlowRequest(next_id + 1, 3, 0, payload(3, 0, 480))]
    next_id += 2
    sched, carry = schedule_superframe(pending + fresh, Policy.EMHCT_F, net, 1000)
    small = [f for f in carry if f.id == 0]
    served = any(h.flow_id == 0 for h in sched.hops())
    print(f"superframe {sf}: small flow {'SCHEDULED' if served else 'missed'}"
          + (f" (miss count now {small[0].miss_count})" if small else ""))
    if served:
        print(sched.gantt(width=40))
        break
    pending = small
