"""Radio primitives for 60 GHz links with flat-top directional antennas.

Everything here is a pure function over small value types. Gains are linear
throughout; dB quantities are converted at the boundary with the helpers at
the bottom of the module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SPEED_OF_LIGHT = 299_792_458.0


class ConfigError(ValueError):
    """Raised for invalid radio or antenna configuration."""


class UnreachableLinkError(ValueError):
    """Raised when a link has zero rate and can never carry a payload."""


def dbi_to_linear(gain_dbi: float) -> float:
    return 10.0 ** (gain_dbi / 10.0)


def dbm_per_mhz_to_w_per_hz(density_dbm_mhz: float) -> float:
    """Convert a noise density in dBm/MHz to W/Hz."""
    return 10.0 ** (density_dbm_mhz / 10.0) * 1e-3 / 1e6


@dataclass(frozen=True)
class AntennaConfig:
    beam_count: int
    mainlobe_gain: float = dbi_to_linear(12.0)
    sidelobe_gain: float = 0.0

    def __post_init__(self):
        if self.beam_count < 1:
            raise ConfigError(f"beam_count must be positive, got {self.beam_count}")
        if not 0.0 <= self.sidelobe_gain < self.mainlobe_gain:
            raise ConfigError("need 0 <= sidelobe_gain < mainlobe_gain")

    @property
    def beamwidth(self) -> float:
        """Beamwidth in radians."""
        return 2.0 * math.pi / self.beam_count

    @property
    def beamwidth_deg(self) -> float:
        return 360.0 / self.beam_count

    @classmethod
    def from_beamwidth_deg(cls, beamwidth_deg: float, gain_dbi: float = 12.0) -> "AntennaConfig":
        return cls(antennas_for_beamwidth(beamwidth_deg), dbi_to_linear(gain_dbi))


@dataclass(frozen=True)
class RadioParams:
    """Link-level constants. Defaults follow the 60 GHz indoor setting."""

    bandwidth_hz: float = 7e9
    tx_power_w: float = 1e-4
    noise_density_w_per_hz: float = dbm_per_mhz_to_w_per_hz(-134.0)
    path_loss_exponent: float = 3.0
    wavelength_m: float = SPEED_OF_LIGHT / 60e9
    slot_duration_s: float = 65.536e-6

    def __post_init__(self):
        for name in ("bandwidth_hz", "tx_power_w", "noise_density_w_per_hz",
                     "wavelength_m", "slot_duration_s"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be strictly positive")
        if not 2.0 <= self.path_loss_exponent <= 6.0:
            raise ConfigError("path_loss_exponent must lie in [2, 6]")

    @property
    def noise_power_w(self) -> float:
        return self.noise_density_w_per_hz * self.bandwidth_hz


def normalize_angle(theta: float) -> float:
    """Map an angle to (-pi, pi]."""
    theta = math.remainder(theta, 2.0 * math.pi)
    return math.pi if theta == -math.pi else theta


def flat_top_gain(theta: float, cfg: AntennaConfig) -> float:
    """Gain seen at angle ``theta`` off boresight (boundary inclusive)."""
    if abs(normalize_angle(theta)) <= cfg.beamwidth / 2.0:
        return cfg.mainlobe_gain
    return cfg.sidelobe_gain


def link_rate(distance_m: float, params: RadioParams, gt: float, gr: float,
              interference_w: float = 0.0) -> float:
    """Shannon rate in bit/s of a link with Friis received power."""
    if distance_m <= 0:
        raise ValueError(f"distance must be positive, got {distance_m}")
    if interference_w < 0:
        raise ValueError("interference must be non-negative")
    lam = params.wavelength_m
    received = params.tx_power_w * gt * gr * lam * lam / (
        16.0 * math.pi ** 2 * distance_m ** params.path_loss_exponent)
    snr = received / (params.noise_power_w + interference_w)
    return params.bandwidth_hz * math.log2(1.0 + snr)


def slots_required(payload_bits: float, rate_bps: float, slot_duration_s: float) -> int:
    """Whole slots needed to carry ``payload_bits`` at ``rate_bps``."""
    if rate_bps <= 0:
        raise UnreachableLinkError("link rate is zero")
    if payload_bits <= 0 or slot_duration_s <= 0:
        raise ValueError("payload and slot duration must be positive")
    n = math.ceil(payload_bits / rate_bps / slot_duration_s)
    # guard against the ratio landing a hair under an integer after rounding
    while n * slot_duration_s * rate_bps < payload_bits:
        n += 1
    return n


def antennas_for_beamwidth(beamwidth_deg: float) -> int:
    if beamwidth_deg <= 0 or beamwidth_deg > 360:
        raise ConfigError(f"beamwidth {beamwidth_deg} deg out of range")
    count = 360.0 / beamwidth_deg
    if abs(count - round(count)) > 1e-9:
        raise ConfigError(f"beamwidth {beamwidth_deg} deg does not divide 360")
    return int(round(count))
