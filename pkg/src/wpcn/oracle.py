"""Brute-force grid oracle used to cross-check the solvers.

Enumerates every allocation on a uniform grid of the scheme's decision
simplex (the last slot takes whatever time is left), evaluates the common
throughput with the rate formulas and keeps the best point. Among equal
maxima the lexicographically smallest allocation wins, which falls out of
enumerating in lexicographic order and only accepting strict improvements.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numba import njit

from .channel import ChannelSet, CoefficientSet, SystemParams, coefficients
from .rates import (
    Direction,
    RatePair,
    Scheme,
    TimeAllocation,
    benchmark_rates,
    cooperative_rates,
    exchange_rates,
    joint_slot_terms,
)
from .solver import SolveResult


@lru_cache(maxsize=8)
def _pairs(m: int) -> tuple[np.ndarray, np.ndarray]:
    """All (a, b) >= 0 with a + b <= m, in lexicographic order."""
    a = np.repeat(np.arange(m + 1), np.arange(m + 1, 0, -1))
    starts = np.repeat(np.cumsum(np.r_[0, np.arange(m + 1, 1, -1)]), np.arange(m + 1, 0, -1))
    b = np.arange(a.size) - starts
    a.flags.writeable = False
    b.flags.writeable = False
    return a, b


class _Best:
    """Running arg-max that keeps the first (lexicographically smallest) maximizer."""

    def __init__(self):
        self.value = -np.inf
        self.alloc = None
        self.count = 0

    def offer(self, common, make_alloc):
        self.count += common.size
        if common.size == 0:
            return
        k = int(np.argmax(common))
        if common[k] > self.value:
            self.value = float(common[k])
            self.alloc = make_alloc(k)


def _grid_size(usable: float, step: float) -> int:
    if not 0 < step <= 0.1:
        raise ValueError(f"grid_step must lie in (0, 0.1], got {step}")
    n = int(np.floor(usable / step + 1e-9))
    if n < 1:
        raise ValueError(f"grid step {step} leaves no feasible point in {usable}")
    return n


def _remainder(usable, step, used):
    return np.maximum(usable - step * used, 0.0)


def _search_cooperative(coeffs, usable, step, n, scheme):
    """3-D grid over (t1, t2, t3) with the joint slot split equally."""
    best = _Best()
    for i1 in range(n + 1):
        a, b = _pairs(n - i1)
        t1 = np.full(a.size, step * i1)
        t2, t3 = step * a, step * b
        t4 = _remainder(usable, step, i1 + a + b)
        alloc = TimeAllocation(t1, t2, t3, 0.5 * t4, 0.5 * t4)
        pair = cooperative_rates(alloc, coeffs, scheme)
        best.offer(np.minimum(pair.r_x, pair.r_y),
                   lambda k: TimeAllocation(*(float(v[k]) for v in alloc.as_tuple())))
    return best


@njit(cache=True)
def _best_split(exchange, per_time, over_x, over_y, t4, free, step):
    """Enumerate t4a = j * step for every (t1, t2, t3) row; first strict maximum wins."""
    best, best_row, best_j = -np.inf, -1, -1
    for row in range(exchange.size):
        for j in range(free[row] + 1):
            t4a = step * j
            t4b = max(t4[row] - t4a, 0.0)
            value = min(exchange[row],
                        t4a * per_time[row] + over_x[row],
                        t4b * per_time[row] + over_y[row])
            if value > best:
                best, best_row, best_j = value, row, j
    return best, best_row, best_j


def _search_dtb_jd(coeffs, usable, step, n):
    """4-D grid over (t1, t2, t3, t4a); t4b takes the remainder.

    The joint rates are linear in the split, ``t4a * per_time + overheard``,
    so the split-free factors come from the rate functions once per
    (t1, t2, t3) and the t4a axis is enumerated on top of them.
    """
    best = _Best()
    for i1 in range(n + 1):
        a, b = _pairs(n - i1)
        t1 = np.full(a.size, step * i1)
        t2, t3 = step * a, step * b
        t4 = _remainder(usable, step, i1 + a + b)
        r_x2, r_y3 = exchange_rates(TimeAllocation(t1, t2, t3, t4, 0.0), coeffs)
        per_time, over_x, over_y = joint_slot_terms(t1, t2, t3, t4, coeffs, coherent=True)
        free = (n - i1 - a - b).astype(np.int64)
        value, row, j = _best_split(np.minimum(r_x2, r_y3), per_time, over_x, over_y,
                                    t4, free, step)
        best.count += int(free.sum() + free.size)
        if value > best.value:
            t4a = step * j
            best.value = value
            best.alloc = TimeAllocation(float(t1[row]), float(t2[row]), float(t3[row]),
                                        t4a, max(float(t4[row]) - t4a, 0.0))
    return best


def _search_noncoop(params, channels, usable, step, n):
    a, b = _pairs(n)
    t1, t2 = step * a, step * b
    t3 = _remainder(usable, step, a + b)
    alloc = TimeAllocation(t1, t2, t3, np.zeros_like(t1), np.zeros_like(t1))
    pair = benchmark_rates(alloc, params, channels, Scheme.NONCOOP)
    best = _Best()
    best.offer(np.minimum(pair.r_x, pair.r_y),
               lambda k: TimeAllocation(float(t1[k]), float(t2[k]), float(t3[k]), 0.0, 0.0))
    return best


def _search_relay(params, channels, usable, step, n, scheme, direction):
    """3-D grid over (t1, t2, forwarded part of the relay slot)."""
    best = _Best()
    for i1 in range(n + 1):
        a, b = _pairs(n - i1)
        t1 = np.full(a.size, step * i1)
        t2, t3a = step * a, step * b
        t3b = _remainder(usable, step, i1 + a + b)
        alloc = TimeAllocation(t1, t2, np.zeros_like(t1), t3a, t3b)
        pair = benchmark_rates(alloc, params, channels, scheme, direction)
        best.offer(np.minimum(pair.r_x, pair.r_y),
                   lambda k: TimeAllocation(float(t1[k]), float(t2[k]), 0.0,
                                            float(t3a[k]), float(t3b[k])))
    return best


def _scalar_pair(pair: RatePair) -> RatePair:
    return RatePair(r_x=float(pair.r_x), r_y=float(pair.r_y),
                    phases={k: float(v) for k, v in pair.phases.items()})


def oracle_grid(scheme: Scheme, params: SystemParams, channels: ChannelSet,
                coeffs: CoefficientSet | None = None, grid_step: float = 5e-3,
                direction: Direction | None = None) -> SolveResult:
    """Exhaustive grid maximum of the common throughput for ``scheme``.

    ``coeffs`` defaults to the coefficients of ``(params, channels)``. For
    STBC with joint decoding the grid maximizes the NJD problem and the
    joint-decoding rates are evaluated at that point, matching how the
    solver defines that scheme's achievable value. Relay schemes search
    both directions unless ``direction`` is given.
    """
    scheme = Scheme(scheme)
    if coeffs is None:
        coeffs = coefficients(params, channels)
    usable = params.usable_time
    n = _grid_size(usable, grid_step)

    if scheme.relay and direction is None:
        results = [oracle_grid(scheme, params, channels, coeffs, grid_step, d)
                   for d in (Direction.Y_VIA_X, Direction.X_VIA_Y)]
        return results[1] if results[1].common > results[0].common else results[0]

    if scheme is Scheme.NONCOOP:
        best = _search_noncoop(params, channels, usable, grid_step, n)
        rates = benchmark_rates(best.alloc, params, channels, scheme)
    elif scheme.relay:
        best = _search_relay(params, channels, usable, grid_step, n, scheme, direction)
        rates = benchmark_rates(best.alloc, params, channels, scheme, direction)
    elif scheme is Scheme.DTB_JD:
        best = _search_dtb_jd(coeffs, usable, grid_step, n)
        rates = cooperative_rates(best.alloc, coeffs, scheme)
    else:
        grid_scheme = Scheme.STBC_NJD if scheme is Scheme.STBC_JD else scheme
        best = _search_cooperative(coeffs, usable, grid_step, n, grid_scheme)
        rates = cooperative_rates(best.alloc, coeffs, scheme)

    rates = _scalar_pair(rates)
    return SolveResult(
        scheme=scheme,
        allocation=best.alloc,
        rates=rates,
        common=min(rates.r_x, rates.r_y),
        converged=True,
        iterations=best.count,
        achievable=scheme is Scheme.STBC_JD,
        direction=direction if scheme.relay else None,
    )
