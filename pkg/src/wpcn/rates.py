"""Achievable-rate formulas for the cooperation and benchmark schemes.

Every function here is a pure numpy expression: allocation fields may be
floats or broadcast-compatible arrays, which is how the solvers and the grid
oracle evaluate many allocations at once. Rates are bits/s/Hz accumulated
over the unit block.

A term ``d * log2(1 + c * t1 / s)`` is taken as 0 when its duration ``d`` or
its power-spreading duration ``s`` is 0 (the continuous limit, since
``t * log(1 + c / t) -> 0``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, CoefficientSet, SystemParams, coefficients

_LN2 = math.log(2.0)


class ContractError(ValueError):
    """An allocation does not follow the slot layout its scheme requires."""


class Scheme(str, enum.Enum):
    STBC_NJD = "stbc-njd"
    STBC_JD = "stbc-jd"
    DTB_NJD = "dtb-njd"
    DTB_JD = "dtb-jd"
    RELAY_NJD = "relay-njd"
    RELAY_JD = "relay-jd"
    NONCOOP = "noncoop"

    @property
    def cooperative(self) -> bool:
        return self in _COOPERATIVE

    @property
    def coherent(self) -> bool:
        return self in (Scheme.DTB_NJD, Scheme.DTB_JD)

    @property
    def joint_decoding(self) -> bool:
        return self in (Scheme.STBC_JD, Scheme.DTB_JD, Scheme.RELAY_JD)

    @property
    def relay(self) -> bool:
        return self in (Scheme.RELAY_NJD, Scheme.RELAY_JD)

    @property
    def equal_split(self) -> bool:
        """Whether the joint slot must be shared equally between the users."""
        return self in (Scheme.STBC_NJD, Scheme.STBC_JD, Scheme.DTB_NJD)


_COOPERATIVE = frozenset({Scheme.STBC_NJD, Scheme.STBC_JD, Scheme.DTB_NJD, Scheme.DTB_JD})


class Direction(str, enum.Enum):
    """Which user forwards for the other in the relay benchmark."""

    Y_VIA_X = "y-via-x"  # X relays Y's message: Y -> X -> DN
    X_VIA_Y = "x-via-y"  # Y relays X's message: X -> Y -> DN


@dataclass(frozen=True)
class TimeAllocation:
    """Durations of the slots after channel estimation, as block fractions.

    For the cooperation schemes ``t4a``/``t4b`` are the parts of the joint
    slot that carry X's and Y's data. The relay benchmark has only two WIT
    slots: it keeps ``t3 = 0`` and stores the relay-slot split in
    ``t4a`` (forwarding the helped user's data) and ``t4b`` (the relay's own
    data). Non-cooperation uses ``t1, t2, t3`` only.
    """

    t1: float
    t2: float
    t3: float
    t4a: float = 0.0
    t4b: float = 0.0

    @property
    def t4(self):
        return self.t4a + self.t4b

    @property
    def total(self):
        return self.t1 + self.t2 + self.t3 + self.t4a + self.t4b

    def as_tuple(self) -> tuple:
        return (self.t1, self.t2, self.t3, self.t4a, self.t4b)

    def validate(self, ce_overhead: float, tol: float = 1e-9) -> "TimeAllocation":
        """Raise ``ValueError`` unless this is a feasible allocation."""
        for name, value in zip(("t1", "t2", "t3", "t4a", "t4b"), self.as_tuple()):
            if np.any(np.asarray(value) < 0):
                raise ValueError(f"{name} must be >= 0, got {np.min(value)}")
        gap = np.abs(np.asarray(self.total) - (1.0 - ce_overhead))
        if np.any(gap > tol):
            raise ValueError(
                f"slot durations sum to {self.total}, expected {1.0 - ce_overhead}"
            )
        return self


@dataclass(frozen=True)
class RatePair:
    """Per-user rates plus the named phase rates they were built from."""

    r_x: float
    r_y: float
    phases: dict = field(default_factory=dict)


def _check_nonnegative(alloc: TimeAllocation) -> None:
    for name, value in zip(("t1", "t2", "t3", "t4a", "t4b"), alloc.as_tuple()):
        if np.any(np.asarray(value) < 0):
            raise ValueError(f"negative slot duration {name}={np.min(value)}")


def snr(coeff, t1, spread):
    """Receive SNR ``coeff * t1 / spread`` of a user spreading its harvest over ``spread``."""
    t1 = np.asarray(t1, dtype=float)
    spread = np.asarray(spread, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(spread > 0, coeff * t1 / spread, 0.0)


def slot_rate(duration, gamma):
    """``duration * log2(1 + gamma)``, zero for zero duration."""
    duration = np.asarray(duration, dtype=float)
    return np.where(duration > 0, duration * np.log1p(gamma) / _LN2, 0.0)


def exchange_rates(alloc: TimeAllocation, coeffs: CoefficientSet):
    """Rates of the X->Y (slot 2) and Y->X (slot 3) message exchange."""
    _check_nonnegative(alloc)
    t4 = alloc.t4
    r_x2 = slot_rate(alloc.t2, snr(coeffs.rho1, alloc.t1, alloc.t2 + t4))
    r_y3 = slot_rate(alloc.t3, snr(coeffs.rho2, alloc.t1, alloc.t3 + t4))
    return r_x2, r_y3


def joint_slot_terms(t1, t2, t3, t4, coeffs: CoefficientSet, coherent: bool):
    """Pieces of the joint-slot rates that do not depend on the t4 split.

    Returns ``(per_time, overheard_x, overheard_y)``: the joint rate per unit
    of joint-slot time, and the rates at which the DN could decode X's slot-2
    and Y's slot-3 broadcasts directly.
    """
    gamma_x = snr(coeffs.rho3, t1, np.add(t2, t4))
    gamma_y = snr(coeffs.rho4, t1, np.add(t3, t4))
    if coherent:
        gamma = (np.sqrt(gamma_x) + np.sqrt(gamma_y)) ** 2
    else:
        gamma = gamma_x + gamma_y
    per_time = np.log1p(gamma) / _LN2
    return per_time, slot_rate(t2, gamma_x), slot_rate(t3, gamma_y)


def joint_rates(alloc: TimeAllocation, coeffs: CoefficientSet, scheme: Scheme):
    """Rates at which the DN gets X's and Y's data in the joint slot."""
    if not scheme.cooperative:
        raise ContractError(f"{scheme.value} has no joint transmission slot")
    _check_nonnegative(alloc)
    if scheme.equal_split and not np.all(
            np.isclose(alloc.t4a, alloc.t4b, rtol=1e-9, atol=1e-12)):
        raise ContractError(f"{scheme.value} requires t4a == t4b")
    per_time, over_x, over_y = joint_slot_terms(
        alloc.t1, alloc.t2, alloc.t3, alloc.t4, coeffs, scheme.coherent)
    r_x4 = np.multiply(alloc.t4a, per_time)
    r_y4 = np.multiply(alloc.t4b, per_time)
    if scheme.joint_decoding:
        r_x4 = r_x4 + over_x
        r_y4 = r_y4 + over_y
    return r_x4, r_y4


def cooperative_rates(alloc: TimeAllocation, coeffs: CoefficientSet,
                      scheme: Scheme) -> RatePair:
    r_x2, r_y3 = exchange_rates(alloc, coeffs)
    r_x4, r_y4 = joint_rates(alloc, coeffs, scheme)
    return RatePair(
        r_x=np.minimum(r_x2, r_x4),
        r_y=np.minimum(r_y3, r_y4),
        phases={"r_x2": r_x2, "r_y3": r_y3, "r_x4": r_x4, "r_y4": r_y4},
    )


def relay_terms(t1, t2, t3, coeffs: CoefficientSet, direction: Direction,
                joint_decoding: bool):
    """Split-independent pieces of the relay benchmark rates.

    Returns ``(to_relay, per_time, direct)``: the helped user's rate to the
    relay in slot 2, the relay's DN rate per unit of slot-3 time, and the
    extra rate the DN gets by decoding the slot-2 broadcast (zero without
    joint decoding).
    """
    if direction is Direction.X_VIA_Y:
        coeffs = coeffs.swapped()
    # helped user is "Y" in the Y_VIA_X frame
    to_relay = slot_rate(t2, snr(coeffs.rho2, t1, t2))
    per_time = np.log1p(snr(coeffs.rho3, t1, t3)) / _LN2
    if joint_decoding:
        direct = slot_rate(t2, snr(coeffs.rho4, t1, t2))
    else:
        direct = np.zeros_like(to_relay)
    return to_relay, per_time, direct


def benchmark_rates(alloc: TimeAllocation, params: SystemParams,
                    channels: ChannelSet, scheme: Scheme,
                    direction: Direction = Direction.Y_VIA_X) -> RatePair:
    """Rates of the relay and non-cooperation benchmarks."""
    _check_nonnegative(alloc)
    coeffs = coefficients(params, channels)
    if scheme is Scheme.NONCOOP:
        if np.any(np.asarray(alloc.t4) != 0):
            raise ContractError("noncoop uses t1, t2, t3 only; t4a/t4b must be 0")
        r_x2 = slot_rate(alloc.t2, snr(coeffs.rho3, alloc.t1, alloc.t2))
        r_y3 = slot_rate(alloc.t3, snr(coeffs.rho4, alloc.t1, alloc.t3))
        return RatePair(r_x=r_x2, r_y=r_y3, phases={"r_x2": r_x2, "r_y3": r_y3})
    if not scheme.relay:
        raise ContractError(f"{scheme.value} is not a benchmark scheme")
    if np.any(np.asarray(alloc.t3) != 0):
        raise ContractError("relay layout keeps t3 = 0; the relay slot is t4a + t4b")
    t3 = alloc.t4a + alloc.t4b
    to_relay, per_time, direct = relay_terms(
        alloc.t1, alloc.t2, t3, coeffs, direction, scheme.joint_decoding)
    via_relay = alloc.t4a * per_time + direct
    own = alloc.t4b * per_time
    helped = np.minimum(to_relay, via_relay)
    phases = {"to_relay": to_relay, "via_relay": via_relay, "relay_own": own}
    if direction is Direction.Y_VIA_X:
        return RatePair(r_x=own, r_y=helped, phases=phases)
    return RatePair(r_x=helped, r_y=own, phases=phases)


def common_throughput(pair: RatePair):
    """Max-min fairness metric: the smaller of the two users' rates."""
    return np.minimum(pair.r_x, pair.r_y)
