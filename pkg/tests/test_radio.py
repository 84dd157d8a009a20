import math

import pytest
from hypothesis import given, settings, strategies as st

from wpansched.radio import (AntennaConfig, ConfigError, RadioParams, UnreachableLinkError,
                             antennas_for_beamwidth, dbi_to_linear, flat_top_gain, link_rate,
                             slots_required)

# Evaluated once with mpmath at 40 digits from the Shannon/Friis expression
RATE_2M_BPS = 75596533819.3727
SLOTS_100MB_2M = 21

G12 = dbi_to_linear(12.0)


def test_rate_at_two_metres_matches_pinned_value():
    r = link_rate(2.0, RadioParams(), G12, G12)
    assert r == pytest.approx(RATE_2M_BPS, rel=1e-12)


def test_slots_for_100mb_at_two_metres():
    r = link_rate(2.0, RadioParams(), G12, G12)
    assert slots_required(100e6, r, RadioParams().slot_duration_s) == SLOTS_100MB_2M


def test_noise_density_conversion():
    # -134 dBm/MHz -> W/Hz
    assert RadioParams().noise_density_w_per_hz == pytest.approx(10 ** -13.4 * 1e-3 / 1e6)


def test_flat_top_boundaries():
    cfg = AntennaConfig.from_beamwidth_deg(45)
    half = math.radians(22.5)
    assert flat_top_gain(0.0, cfg) == cfg.mainlobe_gain
    assert flat_top_gain(half - 1e-9, cfg) == cfg.mainlobe_gain
    assert flat_top_gain(half + 1e-9, cfg) == cfg.sidelobe_gain
    assert flat_top_gain(math.pi, AntennaConfig.from_beamwidth_deg(20)) == 0.0


def test_antenna_invariants():
    for bw, n in ((20, 18), (45, 8), (90, 4), (180, 2)):
        assert antennas_for_beamwidth(bw) == n
        cfg = AntennaConfig.from_beamwidth_deg(bw)
        assert cfg.beamwidth * cfg.beam_count == pytest.approx(2 * math.pi, rel=1e-9)
    with pytest.raises(ConfigError):
        antennas_for_beamwidth(7)
    with pytest.raises(ValueError):
        AntennaConfig(4, mainlobe_gain=1.0, sidelobe_gain=2.0)


def test_rate_monotone_examples():
    p2 = RadioParams(path_loss_exponent=2.0)
    assert link_rate(4, p2, G12, G12) < link_rate(2, p2, G12, G12)
    noise = RadioParams().noise_power_w
    assert link_rate(2, RadioParams(), G12, G12, 10 * noise) < link_rate(2, RadioParams(), G12, G12)
    with pytest.raises(ValueError):
        link_rate(0.0, RadioParams(), G12, G12)


def test_slot_rounding():
    t = 1e-3
    assert slots_required(5000, 1e6, t) == 5
    assert slots_required(5001, 1e6, t) == 6
    with pytest.raises(UnreachableLinkError):
        slots_required(1, 0.0, t)


@given(theta=st.floats(-10, 10), bw=st.sampled_from([20, 45, 90, 180]))
def test_gain_even(theta, bw):
    cfg = AntennaConfig.from_beamwidth_deg(bw)
    assert flat_top_gain(theta, cfg) == flat_top_gain(-theta, cfg)


@settings(max_examples=100)
@given(d=st.floats(0.1, 30), n=st.floats(2, 6), g=st.floats(0.5, 50),
       i=st.floats(0, 1e-9), k=st.floats(1.01, 3))
def test_rate_strictly_monotone(d, n, g, i, k):
    p = RadioParams(path_loss_exponent=n)
    base = link_rate(d, p, g, g, i)
    assert link_rate(d * k, p, g, g, i) < base
    assert link_rate(d, p, g, g, i * k + 1e-12) < base
    assert link_rate(d, p, g * k, g, i) > base
    assert link_rate(d, p, g, g * k, i) > base


@given(p=st.floats(1, 1e10), r=st.floats(1e3, 1e11), t=st.floats(1e-7, 1e-2))
def test_payload_always_fits(p, r, t):
    n = slots_required(p, r, t)
    assert n >= 1 and n * t * r >= p
