"""How far can a 60 GHz link reach, and what does it cost in slots?

Walks through the radio primitives with the default parameters: a 7 GHz
channel, 0.1 mW transmit power, 12 dBi antennas on both ends and a
path-loss exponent of 3.
"""
import numpy as np

from wpansched.radio import (AntennaConfig, RadioParams, antennas_for_beamwidth, dbi_to_linear,
                             flat_top_gain, link_rate, slots_required)

p = RadioParams()
g = dbi_to_linear(12.0)
print(f"noise floor over the channel: {p.noise_power_w:.3e} W")

# Rate falls off quickly with distance; the room diagonal is about 22.6 m.
for d in (1, 2, 4, 8, 16, 22.6):
    r = link_rate(d, p, g, g)
    print(f"{d:5.1f} m  {r / 1e9:6.2f} Gb/s  350 Mb -> {slots_required(350e6, r, p.slot_duration_s):4d} slots")

# Two short hops can beat one long one: this is what makes relaying pay off.
direct = slots_required(300e6, link_rate(14, p, g, g), p.slot_duration_s)
relayed = 2 * slots_required(300e6, link_rate(7, p, g, g), p.slot_duration_s)
print(f"\n14 m direct: {direct} slots; two 7 m hops: {relayed} slots")

# Narrower beams mean more antenna elements per node.
for bw in (20, 45, 90, 180):
    cfg = AntennaConfig.from_beamwidth_deg(bw)
    inside = flat_top_gain(np.radians(bw / 2), cfg)
    outside = flat_top_gain(np.radians(bw / 2 + 1), cfg)
    print(f"{bw:3d} deg: {antennas_for_beamwidth(bw):2d} antennas, edge gain {inside:.1f}, "
          f"1 deg past the edge {outside:.1f}")
