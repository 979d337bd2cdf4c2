"""Physical parameters, the deterministic path-loss model and SNR coefficients.

All quantities are linear (not dB). Channel gains are power gains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

SPEED_OF_LIGHT = 3e8  # m/s, as used by the path-loss formula


@dataclass(frozen=True)
class SystemParams:
    """Network constants shared by every scheme.

    ``ce_overhead`` is the channel-estimation time t0 as a fraction of the
    unit block; the remaining ``1 - ce_overhead`` is what the solvers split.
    """

    en_power_watts: float = 3.0
    harvest_efficiency: float = 0.5
    noise_power_watts: float = 1e-10
    ce_overhead: float = 0.05
    block_length: float = 1.0

    def __post_init__(self):
        if not self.en_power_watts > 0:
            raise ValueError(f"en_power_watts must be > 0, got {self.en_power_watts}")
        if not 0 < self.harvest_efficiency <= 1:
            raise ValueError(
                f"harvest_efficiency must lie in (0, 1], got {self.harvest_efficiency}"
            )
        if not self.noise_power_watts > 0:
            raise ValueError(
                f"noise_power_watts must be > 0, got {self.noise_power_watts}"
            )
        if not 0 <= self.ce_overhead < 1:
            raise ValueError(f"ce_overhead must lie in [0, 1), got {self.ce_overhead}")
        if self.block_length != 1.0:
            raise ValueError("block_length is fixed to 1")

    @property
    def usable_time(self) -> float:
        """Time left for harvesting and transmission, ``T - t0``."""
        return self.block_length - self.ce_overhead


@dataclass(frozen=True)
class Geometry:
    """Node placement (metres) and radio constants for the path-loss model.

    ``antenna_gain`` defaults to 1 because the reference gains quoted for
    5 m and 40 m at 915 MHz only come out with unit gain.
    """

    d_en_x: float = 5.0
    d_en_y: float = 10.0
    d_xy: float = 2.0
    d_xd: float = 40.0
    d_yd: float = 40.0
    carrier_hz: float = 915e6
    path_loss_exponent: float = 2.0
    antenna_gain: float = 1.0

    def __post_init__(self):
        for name in ("d_en_x", "d_en_y", "d_xy", "d_xd", "d_yd",
                     "carrier_hz", "path_loss_exponent", "antenna_gain"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be > 0, got {value}")


@dataclass(frozen=True)
class ChannelSet:
    """Power gains of the six links between EN, users X/Y and the DN."""

    h_ex: float
    h_ey: float
    h_xy: float
    h_yx: float
    h_xd: float
    h_yd: float

    def __post_init__(self):
        for name in ("h_ex", "h_ey", "h_xy", "h_yx", "h_xd", "h_yd"):
            value = getattr(self, name)
            if not value >= 0:
                raise ValueError(f"{name} must be >= 0, got {value}")

    @classmethod
    def from_geometry(cls, geometry: Geometry) -> "ChannelSet":
        """Build reciprocal gains from distances."""
        h_xy = path_loss_gain(geometry.d_xy, geometry)
        return cls(
            h_ex=path_loss_gain(geometry.d_en_x, geometry),
            h_ey=path_loss_gain(geometry.d_en_y, geometry),
            h_xy=h_xy,
            h_yx=h_xy,
            h_xd=path_loss_gain(geometry.d_xd, geometry),
            h_yd=path_loss_gain(geometry.d_yd, geometry),
        )

    @classmethod
    def from_gains(cls, h_ex, h_ey, h_xy, h_xd, h_yd, h_yx=None) -> "ChannelSet":
        """Explicit gains; ``h_yx`` defaults to ``h_xy`` (reciprocity)."""
        return cls(h_ex=h_ex, h_ey=h_ey, h_xy=h_xy,
                   h_yx=h_xy if h_yx is None else h_yx,
                   h_xd=h_xd, h_yd=h_yd)

    def with_gains(self, **gains) -> "ChannelSet":
        return replace(self, **gains)


@dataclass(frozen=True)
class CoefficientSet:
    """Dimensionless SNR coefficients ``eta * P_t * h_E? * h_?? / N_0``.

    rho1: EN->X then X->Y, rho2: EN->Y then Y->X,
    rho3: EN->X then X->DN, rho4: EN->Y then Y->DN.
    Multiplying one by ``t1 / d`` gives the receive SNR of a user that spends
    its whole harvest over a transmit duration ``d``.
    """

    rho1: float
    rho2: float
    rho3: float
    rho4: float

    def __post_init__(self):
        for name in ("rho1", "rho2", "rho3", "rho4"):
            value = getattr(self, name)
            if not value >= 0:
                raise ValueError(f"{name} must be >= 0, got {value}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.rho1, self.rho2, self.rho3, self.rho4)

    def swapped(self) -> "CoefficientSet":
        """Exchange the roles of X and Y."""
        return CoefficientSet(self.rho2, self.rho1, self.rho4, self.rho3)


def path_loss_gain(distance: float, geometry: Geometry) -> float:
    """Power gain ``G_A * (c / (4 pi d f))**exponent`` of a link of given length."""
    if not distance > 0:
        raise ValueError(f"distance must be > 0, got {distance}")
    if not geometry.carrier_hz > 0:
        raise ValueError(f"carrier_hz must be > 0, got {geometry.carrier_hz}")
    ratio = SPEED_OF_LIGHT / (4.0 * math.pi * distance * geometry.carrier_hz)
    return geometry.antenna_gain * ratio ** geometry.path_loss_exponent


def coefficients(params: SystemParams, channels: ChannelSet) -> CoefficientSet:
    if not params.noise_power_watts > 0:
        raise ValueError("noise power must be > 0")
    scale = params.harvest_efficiency * params.en_power_watts / params.noise_power_watts
    return CoefficientSet(
        rho1=scale * channels.h_ex * channels.h_xy,
        rho2=scale * channels.h_ey * channels.h_yx,
        rho3=scale * channels.h_ex * channels.h_xd,
        rho4=scale * channels.h_ey * channels.h_yd,
    )


def harvested_energy(t1: float, params: SystemParams,
                     channels: ChannelSet) -> tuple[float, float]:
    """Energy (J per unit block) collected by X and Y during a WET slot of length t1."""
    if not 0 <= t1 <= params.usable_time:
        raise ValueError(f"t1 must lie in [0, {params.usable_time}], got {t1}")
    base = params.harvest_efficiency * t1 * params.en_power_watts
    return base * channels.h_ex, base * channels.h_ey


def unit_instance(coeffs: CoefficientSet, ce_overhead: float = 0.0,
                  ) -> tuple[SystemParams, ChannelSet]:
    """A (params, channels) pair whose coefficients equal ``coeffs`` exactly.

    Handy for driving the benchmark solvers, which take raw parameters, from a
    coefficient set. Uses ``eta * P_t / N_0 = 1`` and unit EN gains.
    """
    params = SystemParams(en_power_watts=0.5, harvest_efficiency=0.5,
                          noise_power_watts=0.25, ce_overhead=ce_overhead)
    channels = ChannelSet(h_ex=1.0, h_ey=1.0, h_xy=coeffs.rho1, h_yx=coeffs.rho2,
                          h_xd=coeffs.rho3, h_yd=coeffs.rho4)
    return params, channels
