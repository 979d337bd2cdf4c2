"""Parameter sweeps over the four built-in channel setups, with CSV output."""

from __future__ import annotations

import csv
import enum
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, Geometry, SystemParams, coefficients, path_loss_gain
from .rates import Scheme
from .solver import SolveResult, SolverConfig, solve, solve_stbc_jd

log = logging.getLogger(__name__)

CSV_HEADER = ("sweep_value", "scheme", "common", "t1", "t2", "t3", "t4a", "t4b",
              "r_x", "r_y", "converged")


class SweepKind(str, enum.Enum):
    USER_TO_DN_DISTANCE = "user-to-dn-distance"  # metres, both users to DN
    DN_DISPARITY_DB = "dn-disparity-db"  # h_yd / h_xd in dB
    EN_DISPARITY_DB = "en-disparity-db"  # h_ex / h_ey in dB
    INTER_USER_DISTANCE = "inter-user-distance"  # metres between X and Y


# default (start, stop) per kind
FIGURE_RANGES = {
    SweepKind.USER_TO_DN_DISTANCE: (25.0, 85.0),
    SweepKind.DN_DISPARITY_DB: (0.0, 10.0),
    SweepKind.EN_DISPARITY_DB: (0.0, 12.0),
    SweepKind.INTER_USER_DISTANCE: (1.0, 10.0),
}

FIGURES = {
    "fig6": SweepKind.USER_TO_DN_DISTANCE,
    "fig7": SweepKind.DN_DISPARITY_DB,
    "fig8": SweepKind.EN_DISPARITY_DB,
    "fig9": SweepKind.INTER_USER_DISTANCE,
}


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: which parameter moves, over what range, on which base instance.

    The base gains come from ``channels`` when given, otherwise from
    ``geometry``. Each kind overwrites only the gains it sweeps:

    - user-to-dn-distance: h_xd = h_yd = path-loss gain at the swept distance
    - dn-disparity-db: h_xd = h_yd / 10**(dB/10)
    - en-disparity-db: h_ey = h_ex / 10**(dB/10)
    - inter-user-distance: h_xy = h_yx = path-loss gain at the swept distance
    """

    sweep_kind: SweepKind
    start: float
    stop: float
    num_points: int = 25
    params: SystemParams = field(default_factory=SystemParams)
    geometry: Geometry = field(default_factory=Geometry)
    channels: ChannelSet | None = None
    schemes: tuple = tuple(Scheme)

    def __post_init__(self):
        object.__setattr__(self, "sweep_kind", SweepKind(self.sweep_kind))
        object.__setattr__(self, "schemes", tuple(Scheme(s) for s in self.schemes))
        if not self.start < self.stop:
            raise ValueError(f"sweep needs start < stop, got {self.start} >= {self.stop}")
        if self.num_points < 2:
            raise ValueError(f"num_points must be >= 2, got {self.num_points}")
        if not self.schemes:
            raise ValueError("sweep needs at least one scheme")
        distance = self.sweep_kind in (SweepKind.USER_TO_DN_DISTANCE,
                                       SweepKind.INTER_USER_DISTANCE)
        if distance and self.start <= 0:
            raise ValueError(f"distances must be > 0, got start={self.start}")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num_points)

    def base_channels(self) -> ChannelSet:
        if self.channels is not None:
            return self.channels
        return ChannelSet.from_geometry(self.geometry)

    def instance_at(self, value: float) -> ChannelSet:
        """Channel gains of the sweep point ``value``."""
        base = self.base_channels()
        kind = self.sweep_kind
        if kind is SweepKind.USER_TO_DN_DISTANCE:
            gain = path_loss_gain(value, self.geometry)
            return base.with_gains(h_xd=gain, h_yd=gain)
        if kind is SweepKind.DN_DISPARITY_DB:
            return base.with_gains(h_xd=base.h_yd / 10.0 ** (value / 10.0))
        if kind is SweepKind.EN_DISPARITY_DB:
            return base.with_gains(h_ey=base.h_ex / 10.0 ** (value / 10.0))
        gain = path_loss_gain(value, self.geometry)
        return base.with_gains(h_xy=gain, h_yx=gain)


@dataclass(frozen=True)
class SweepRow:
    sweep_value: float
    scheme: str
    common: float
    t1: float
    t2: float
    t3: float
    t4a: float
    t4b: float
    r_x: float
    r_y: float
    converged: bool

    @classmethod
    def from_result(cls, value: float, result: SolveResult) -> "SweepRow":
        a = result.allocation
        return cls(float(value), result.scheme.value, result.common, a.t1, a.t2, a.t3,
                   a.t4a, a.t4b, result.rates.r_x, result.rates.r_y, result.converged)

    @classmethod
    def failed(cls, value: float, scheme: Scheme) -> "SweepRow":
        nan = float("nan")
        return cls(float(value), scheme.value, nan, nan, nan, nan, nan, nan, nan, nan, False)

    def csv_fields(self) -> list[str]:
        numbers = (self.common, self.t1, self.t2, self.t3, self.t4a, self.t4b,
                   self.r_x, self.r_y)
        return ([format(self.sweep_value, ".10g"), self.scheme]
                + [format(float(v), ".10g") for v in numbers]
                + ["true" if self.converged else "false"])


def solve_point(params: SystemParams, channels: ChannelSet, schemes,
                cfg: SolverConfig) -> dict[Scheme, SolveResult]:
    """Solve every scheme on one instance; STBC-JD reuses the STBC-NJD solution."""
    results: dict[Scheme, SolveResult] = {}
    for scheme in sorted(schemes, key=lambda s: s.value):
        if scheme is Scheme.STBC_JD:
            continue
        results[scheme] = solve(scheme, params, channels, cfg)
    if Scheme.STBC_JD in schemes:
        njd = results.get(Scheme.STBC_NJD)
        results[Scheme.STBC_JD] = solve_stbc_jd(coefficients(params, channels), params,
                                                cfg, njd=njd)
    return results


def _sweep_point(job) -> list[SweepRow]:
    spec, cfg, value = job
    try:
        channels = spec.instance_at(value)
        results = solve_point(spec.params, channels, spec.schemes, cfg)
    except (ValueError, ArithmeticError) as exc:
        log.warning("sweep point %s failed: %s", value, exc)
        return [SweepRow.failed(value, s) for s in sorted(spec.schemes, key=lambda s: s.value)]
    return [SweepRow.from_result(value, results[s])
            for s in sorted(results, key=lambda s: s.value)]


def worker_count(workers: int | None = None) -> int:
    """Explicit ``workers``, else ``WPCN_THREADS``, else 1."""
    if workers is None:
        text = os.environ.get("WPCN_THREADS", "1")
        try:
            workers = int(text)
        except ValueError:
            raise ValueError(f"WPCN_THREADS must be an integer, got {text!r}") from None
    if workers < 1:
        raise ValueError(f"worker count must be >= 1, got {workers}")
    return workers


def run_sweep(spec: SweepSpec, cfg: SolverConfig | None = None,
              workers: int | None = None) -> list[SweepRow]:
    """Solve every scheme at every sweep point.

    Rows come back ordered by (sweep_value, scheme tag) whatever the worker
    count; each point is solved independently, so the rows are identical too.
    """
    cfg = cfg or SolverConfig()
    jobs = [(spec, cfg, float(v)) for v in spec.values()]
    workers = worker_count(workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_point, jobs))
    else:
        chunks = [_sweep_point(job) for job in jobs]
    rows = [row for chunk in chunks for row in chunk]
    return sorted(rows, key=lambda r: (r.sweep_value, r.scheme))


def write_csv(rows, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())


def figure_specs(params: SystemParams | None = None, geometry: Geometry | None = None,
                 channels: ChannelSet | None = None, num_points: int = 25,
                 schemes=tuple(Scheme)) -> dict[str, SweepSpec]:
    """The four built-in sweeps keyed by output name (fig6 ... fig9)."""
    params = params or SystemParams()
    geometry = geometry or Geometry()
    return {
        name: SweepSpec(kind, *FIGURE_RANGES[kind], num_points=num_points, params=params,
                        geometry=geometry, channels=channels, schemes=schemes)
        for name, kind in FIGURES.items()
    }
