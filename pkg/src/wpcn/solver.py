"""Max-min time allocation for the cooperation and benchmark schemes.

The cooperative solvers run a line search over the harvesting time t1 and,
for every candidate t1, nested bisections that equalize the phase rates:
the exchange slots (r_x2 = r_y3), the joint slot against the exchange
(r_x4 = r_x2) and, for coherent joint decoding, the split of the joint slot
(r_x4 = r_y4). All candidate t1 values are processed together as numpy
vectors; each element follows exactly the scalar bisection path.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .channel import ChannelSet, CoefficientSet, SystemParams, coefficients
from .rates import (
    Direction,
    RatePair,
    Scheme,
    TimeAllocation,
    benchmark_rates,
    cooperative_rates,
    exchange_rates,
    joint_rates,
    joint_slot_terms,
    relay_terms,
    slot_rate,
    snr,
)

log = logging.getLogger(__name__)

# Secondary bisection stop: bracket narrower than this is treated as collapsed.
BRACKET_WIDTH = 1e-12
# Golden-section stop; rate slopes stay below ~30 bits per unit time, so the
# value error at this width is far below any rate tolerance in use.
GOLDEN_WIDTH = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    """Search resolution and stopping rules.

    t1_step is the line-search step over the harvesting time; rate_tolerance
    is the equal-rate residual (bits) that ends each bisection.
    """

    t1_step: float = 1e-3
    rate_tolerance: float = 1e-7
    max_bisection_iters: int = 200
    oracle_grid_step: float = 5e-3
    refine_t1: bool = False

    def __post_init__(self):
        if not 0 < self.t1_step < 1:
            raise ValueError(f"t1_step must lie in (0, 1), got {self.t1_step}")
        if not self.rate_tolerance > 0:
            raise ValueError(f"rate_tolerance must be > 0, got {self.rate_tolerance}")
        if int(self.max_bisection_iters) != self.max_bisection_iters \
                or self.max_bisection_iters < 1:
            raise ValueError("max_bisection_iters must be a positive integer")
        if not self.oracle_grid_step > 0:
            raise ValueError("oracle_grid_step must be > 0")


@dataclass(frozen=True)
class SolveResult:
    """Best allocation found for one scheme on one instance.

    ``converged`` is True when every equal-rate condition the search relies on
    holds within ``rate_tolerance`` at the returned allocation. It is False
    when the optimum sits on a slot boundary where those conditions cannot
    all be met (or a bisection hit its iteration cap); ``common`` is still the
    best value found. ``achievable`` marks values that are not claimed to be
    optimal (STBC with joint decoding).
    """

    scheme: Scheme
    allocation: TimeAllocation
    rates: RatePair
    common: float
    converged: bool
    iterations: int
    achievable: bool = False
    direction: Direction | None = None
    residuals: dict = field(default_factory=dict)


class _Bisection:
    """Vectorized bisection on a gap that changes sign at most once.

    ``evaluate(x, idx)`` returns ``(gap, state)`` for the elements ``idx``;
    a positive gap moves the upper bound down to ``x``. Each element stops
    on ``|gap| < tol`` or when its bracket collapses.
    """

    def __init__(self, cfg: SolverConfig):
        self.tol = cfg.rate_tolerance
        self.max_iters = int(cfg.max_bisection_iters)

    def run(self, evaluate, lo, hi):
        """Bisect every element; returns ``(x, gap, iters, finished, state)``.

        State arrays returned by ``evaluate`` are kept for the last midpoint of
        each element, except ``"work"`` which is summed over iterations.
        """
        lo = np.array(lo, dtype=float)
        hi = np.array(hi, dtype=float)
        n = lo.size
        x = 0.5 * (lo + hi)
        gap_out = np.zeros(n)
        iters = np.zeros(n, dtype=np.int64)
        finished = np.zeros(n, dtype=bool)
        state = {}
        idx = np.arange(n)
        spent = 0
        mid = x.copy()
        gap = np.zeros(n)
        for _ in range(self.max_iters):
            if idx.size == 0:
                break
            mid = 0.5 * (lo + hi)
            gap, sub = evaluate(mid, idx)
            spent += 1
            for key, value in sub.items():
                if key not in state:
                    state[key] = np.zeros(n, dtype=np.asarray(value).dtype)
                if key == "work":
                    state[key][idx] += value
                else:
                    state[key][idx] = value
            down = gap > 0
            hi = np.where(down, mid, hi)
            lo = np.where(down, lo, mid)
            stop = (np.abs(gap) < self.tol) | (hi - lo <= BRACKET_WIDTH)
            if stop.any():
                done = idx[stop]
                x[done] = mid[stop]
                gap_out[done] = gap[stop]
                iters[done] = spent
                finished[done] = True
                keep = ~stop
                idx, lo, hi = idx[keep], lo[keep], hi[keep]
                mid, gap = mid[keep], gap[keep]
        # iteration cap reached
        x[idx] = mid
        gap_out[idx] = gap
        iters[idx] = spent
        return x, gap_out, iters, finished, state


def _t1_grid(usable: float, step: float) -> np.ndarray:
    count = int(np.floor(usable / step + 1e-9))
    if count < 1:
        raise ValueError(f"t1_step {step} exceeds the usable time {usable}")
    return np.minimum(step * np.arange(1, count + 1), usable)


def _balance_exchange(bisect, t1, t4, budget, coeffs):
    """Split ``budget = t2 + t3`` so that r_x2 = r_y3 (r_x2 rises, r_y3 falls in t2)."""

    def gap(t2, idx):
        alloc = TimeAllocation(t1[idx], t2, budget[idx] - t2, 0.5 * t4[idx], 0.5 * t4[idx])
        r_x2, r_y3 = exchange_rates(alloc, coeffs)
        return r_x2 - r_y3, {}

    t2, res, iters, finished, _ = bisect.run(gap, np.zeros_like(budget), budget)
    return t2, budget - t2, iters, finished & (np.abs(res) < bisect.tol)


def _cooperative_profile(t1, usable, coeffs, scheme, cfg):
    """Optimal (t2, t3, t4) for each t1 with an equally split joint slot, by nested bisection."""
    bisect = _Bisection(cfg)
    t1 = np.asarray(t1, dtype=float)
    span = np.maximum(usable - t1, 0.0)

    def joint_gap(t4, idx):
        sub_t1 = t1[idx]
        t2, t3, work, ok = _balance_exchange(bisect, sub_t1, t4, span[idx] - t4, coeffs)
        alloc = TimeAllocation(sub_t1, t2, t3, 0.5 * t4, 0.5 * t4)
        r_x2, _ = exchange_rates(alloc, coeffs)
        r_x4, _ = joint_rates(alloc, coeffs, scheme)
        return r_x4 - r_x2, {"t2": t2, "t3": t3, "work": work, "ok": ok}

    t4, res, iters, finished, state = bisect.run(joint_gap, np.zeros_like(span), span)
    alloc = TimeAllocation(t1, state["t2"], state["t3"], 0.5 * t4, 0.5 * t4)
    pair = cooperative_rates(alloc, coeffs, scheme)
    common = np.minimum(pair.r_x, pair.r_y)
    ok = finished & (np.abs(res) < bisect.tol) & state["ok"]
    work = iters + state["work"]
    return alloc, pair, common, ok, work


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _merge(best: dict, new: dict, take) -> dict:
    if not best:
        return {k: np.array(v, dtype=float) for k, v in new.items()}
    return {k: np.where(take, new[k], best[k]) for k in best}


def _maximize(f, lo, hi, cfg: SolverConfig, scan: int = 9):
    """Elementwise maximum of ``f`` over ``[lo, hi]``.

    A coarse scan picks the best of ``scan`` evenly spaced points (ends
    included), then golden-section search narrows the bracket around it to
    ``GOLDEN_WIDTH``. The best point ever evaluated is returned, so an end
    point wins when the maximum sits on the boundary. ``f(x)`` returns
    ``(value, aux)`` and ``aux`` arrays are returned for the chosen points.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.maximum(np.asarray(hi, dtype=float), lo)
    best_x = lo.copy()
    best_v = np.full(lo.shape, -np.inf)
    best_aux = {}
    evals = 0

    def offer(x, v, aux):
        nonlocal best_x, best_v, best_aux
        take = v > best_v
        best_x = np.where(take, x, best_x)
        best_v = np.where(take, v, best_v)
        best_aux = _merge(best_aux, aux, take)

    fractions = np.linspace(0.0, 1.0, scan)
    scanned = np.empty(lo.shape + (scan,))
    for j, frac in enumerate(fractions):
        x = lo + frac * (hi - lo)
        v, aux = f(x)
        scanned[..., j] = v
        offer(x, v, aux)
    evals += scan
    k = np.argmax(scanned, axis=-1)
    a = lo + fractions[np.maximum(k - 1, 0)] * (hi - lo)
    b = lo + fractions[np.minimum(k + 1, scan - 1)] * (hi - lo)

    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, aux_c = f(c)
    fd, aux_d = f(d)
    offer(c, fc, aux_c)
    offer(d, fd, aux_d)
    evals += 2
    for _ in range(int(cfg.max_bisection_iters)):
        if np.all(b - a <= GOLDEN_WIDTH):
            break
        left = fc >= fd  # keep [a, d]
        a = np.where(left, a, c)
        b = np.where(left, d, b)
        x = np.where(left, b - _GOLDEN * (b - a), a + _GOLDEN * (b - a))
        fx, aux_x = f(x)
        offer(x, fx, aux_x)
        evals += 1
        c, fc, d, fd = (np.where(left, x, d), np.where(left, fx, fd),
                        np.where(left, c, x), np.where(left, fc, fx))
    return best_x, best_v, best_aux, evals


def _best_split(t4, per_time, over_x, over_y):
    """Joint-slot share of X that equalizes r_x4 and r_y4, clipped to [0, t4].

    Both joint rates are linear in the share, so the max-min split is the
    crossing point, or an end of the slot when the lines do not cross.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = (t4 * per_time + over_y - over_x) / (2.0 * per_time)
    cross = np.where(per_time > 0, cross, 0.5 * t4)
    return np.clip(cross, 0.0, t4)


def _dtb_jd_point(t1, t2, t4, span, coeffs):
    """Common throughput of DTB-JD at (t1, t2, t4) with t3 = span - t2 - t4 and the best split."""
    t3 = np.maximum(span - t2 - t4, 0.0)
    r_x2 = slot_rate(t2, snr(coeffs.rho1, t1, t2 + t4))
    r_y3 = slot_rate(t3, snr(coeffs.rho2, t1, t3 + t4))
    per_time, over_x, over_y = joint_slot_terms(t1, t2, t3, t4, coeffs, coherent=True)
    t4a = _best_split(t4, per_time, over_x, over_y)
    r_x4 = t4a * per_time + over_x
    r_y4 = (t4 - t4a) * per_time + over_y
    common = np.minimum(np.minimum(r_x2, r_y3), np.minimum(r_x4, r_y4))
    return common, t3, t4a


def _dtb_jd_profile(t1, usable, coeffs, cfg):
    """Best DTB-JD allocation for each t1.

    The split of the joint slot is solved exactly, which leaves a max-min
    over (t2, t4). That is maximized by nested scan-plus-golden searches,
    t4 outside and t2 inside, so optima where a slot collapses to zero (and
    some phase rates stay above the common rate) are found as well as the
    all-rates-equal interior optimum.
    """
    t1 = np.asarray(t1, dtype=float)
    span = np.maximum(usable - t1, 0.0)
    inner_work = 0

    def over_t4(t4):
        nonlocal inner_work

        def over_t2(t2):
            common, _, t4a = _dtb_jd_point(t1, t2, t4, span, coeffs)
            return common, {"t4a": t4a}

        t2, value, aux, evals = _maximize(over_t2, np.zeros_like(t4), span - t4, cfg)
        inner_work += evals
        return value, {"t2": t2, "t4a": aux["t4a"]}

    t4, _, aux, outer_evals = _maximize(over_t4, np.zeros_like(span), span, cfg)
    t2 = aux["t2"]
    t3 = np.maximum(span - t2 - t4, 0.0)
    t4a = aux["t4a"]
    alloc = TimeAllocation(t1, t2, t3, t4a, np.maximum(t4 - t4a, 0.0))
    pair = cooperative_rates(alloc, coeffs, Scheme.DTB_JD)
    common = np.minimum(pair.r_x, pair.r_y)
    ok = np.ones(t1.shape, dtype=bool)
    # every element goes through the same number of evaluations
    work = np.full(t1.shape, outer_evals + inner_work)
    return alloc, pair, common, ok, work


def _pick(alloc: TimeAllocation, pair: RatePair, common, k: int):
    chosen = TimeAllocation(*(float(np.asarray(v)[k]) for v in alloc.as_tuple()))
    rates = RatePair(
        r_x=float(np.asarray(pair.r_x)[k]),
        r_y=float(np.asarray(pair.r_y)[k]),
        phases={name: float(np.asarray(v)[k]) for name, v in pair.phases.items()},
    )
    return chosen, rates, float(np.asarray(common)[k])


def _cooperative_residuals(rates: RatePair, scheme: Scheme) -> dict:
    p = rates.phases
    residuals = {
        "exchange": abs(p["r_x2"] - p["r_y3"]),
        "joint": abs(p["r_x2"] - p["r_x4"]),
    }
    if not scheme.equal_split:
        residuals["split"] = abs(p["r_x4"] - p["r_y4"])
    return residuals


def _line_search(profile, usable: float, cfg: SolverConfig):
    """Run ``profile`` on the t1 grid and return the arg-max (smallest t1 on ties)."""
    t1 = _t1_grid(usable, cfg.t1_step)
    alloc, pair, common, ok, work = profile(t1)
    k = int(np.argmax(common))
    best = _pick(alloc, pair, common, k) + (bool(ok[k]), int(work.sum()))
    if not cfg.refine_t1:
        return best
    lo = t1[max(k - 1, 0)] if k > 0 else 0.5 * t1[0]
    hi = t1[min(k + 1, t1.size - 1)]
    if hi <= lo:
        return best

    def negative_common(x):
        return -float(profile(np.array([x]))[2][0])

    found = minimize_scalar(negative_common, bounds=(lo, hi), method="bounded",
                            options={"xatol": 1e-9})
    alloc_r, pair_r, common_r, ok_r, work_r = profile(np.array([found.x]))
    if common_r[0] > best[2]:
        log.debug("t1 refinement %.6g -> %.6g", best[0].t1, found.x)
        return _pick(alloc_r, pair_r, common_r, 0) + (
            bool(ok_r[0]), best[4] + int(work_r.sum()) + int(found.nfev))
    return best


def _solve_cooperative(coeffs: CoefficientSet, params: SystemParams,
                       cfg: SolverConfig, scheme: Scheme) -> SolveResult:
    usable = params.usable_time

    def profile(t1):
        if scheme is Scheme.DTB_JD:
            return _dtb_jd_profile(t1, usable, coeffs, cfg)
        return _cooperative_profile(t1, usable, coeffs, scheme, cfg)

    alloc, rates, common, ok, work = _line_search(profile, usable, cfg)
    residuals = _cooperative_residuals(rates, scheme)
    converged = ok and all(r < cfg.rate_tolerance for r in residuals.values())
    return SolveResult(scheme=scheme, allocation=alloc, rates=rates, common=common,
                       converged=converged, iterations=work, residuals=residuals)


def solve_stbc_njd(coeffs: CoefficientSet, params: SystemParams,
                   cfg: SolverConfig | None = None) -> SolveResult:
    """STBC joint transmission, DN decodes the joint slot only."""
    return _solve_cooperative(coeffs, params, cfg or SolverConfig(), Scheme.STBC_NJD)


def solve_dtb_njd(coeffs: CoefficientSet, params: SystemParams,
                  cfg: SolverConfig | None = None) -> SolveResult:
    """Coherent (beamformed) joint transmission with an equal joint-slot split."""
    return _solve_cooperative(coeffs, params, cfg or SolverConfig(), Scheme.DTB_NJD)


def solve_dtb_jd(coeffs: CoefficientSet, params: SystemParams,
                 cfg: SolverConfig | None = None) -> SolveResult:
    """Coherent joint transmission with joint decoding; the joint-slot split is free."""
    return _solve_cooperative(coeffs, params, cfg or SolverConfig(), Scheme.DTB_JD)


def solve_stbc_jd(coeffs: CoefficientSet, params: SystemParams,
                  cfg: SolverConfig | None = None,
                  njd: SolveResult | None = None) -> SolveResult:
    """Achievable throughput of STBC with joint decoding.

    Reuses the STBC-NJD optimal allocation and re-evaluates all four phase
    rates with the joint-decoding expressions. Pass ``njd`` to skip
    re-solving the NJD problem.
    """
    cfg = cfg or SolverConfig()
    if njd is None:
        njd = solve_stbc_njd(coeffs, params, cfg)
    pair = cooperative_rates(njd.allocation, coeffs, Scheme.STBC_JD)
    rates = RatePair(r_x=float(pair.r_x), r_y=float(pair.r_y),
                     phases={k: float(v) for k, v in pair.phases.items()})
    return SolveResult(scheme=Scheme.STBC_JD, allocation=njd.allocation, rates=rates,
                       common=min(rates.r_x, rates.r_y), converged=njd.converged,
                       iterations=njd.iterations, achievable=True,
                       residuals=dict(njd.residuals))


def _noncoop_profile(t1, usable, coeffs, cfg):
    bisect = _Bisection(cfg)
    span = np.maximum(usable - t1, 0.0)

    def gap(t2, idx):
        r_x = slot_rate(t2, snr(coeffs.rho3, t1[idx], t2))
        t3 = span[idx] - t2
        r_y = slot_rate(t3, snr(coeffs.rho4, t1[idx], t3))
        return r_x - r_y, {}

    t2, res, iters, finished, _ = bisect.run(gap, np.zeros_like(span), span)
    alloc = TimeAllocation(t1, t2, span - t2, np.zeros_like(t1), np.zeros_like(t1))
    r_x = slot_rate(alloc.t2, snr(coeffs.rho3, t1, alloc.t2))
    r_y = slot_rate(alloc.t3, snr(coeffs.rho4, t1, alloc.t3))
    pair = RatePair(r_x=r_x, r_y=r_y, phases={"r_x2": r_x, "r_y3": r_y})
    return alloc, pair, np.minimum(r_x, r_y), finished & (np.abs(res) < bisect.tol), iters


def solve_noncoop(params: SystemParams, channels: ChannelSet,
                  cfg: SolverConfig | None = None) -> SolveResult:
    """Both users send straight to the DN in their own slots (TDMA)."""
    cfg = cfg or SolverConfig()
    coeffs = coefficients(params, channels)
    usable = params.usable_time

    def profile(t1):
        return _noncoop_profile(np.asarray(t1, dtype=float), usable, coeffs, cfg)

    alloc, _, _, ok, work = _line_search(profile, usable, cfg)
    # final figures come from the public rate function
    rates = _scalar_pair(benchmark_rates(alloc, params, channels, Scheme.NONCOOP))
    residual = abs(rates.r_x - rates.r_y)
    return SolveResult(scheme=Scheme.NONCOOP, allocation=alloc, rates=rates,
                       common=min(rates.r_x, rates.r_y),
                       converged=ok and residual < cfg.rate_tolerance,
                       iterations=work, residuals={"users": residual})


def _scalar_pair(pair: RatePair) -> RatePair:
    return RatePair(r_x=float(pair.r_x), r_y=float(pair.r_y),
                    phases={k: float(v) for k, v in pair.phases.items()})


def _relay_split(to_relay, per_time, direct, t3):
    """Max-min split of the relay slot between forwarded and own data.

    The relay's own rate ``(t3 - t3a) * per_time`` and the forwarded rate
    ``min(to_relay, t3a * per_time + direct)`` are piecewise linear in the
    forwarded share ``t3a``, so the equalizing share is explicit. The share
    returned gives the relay exactly the max-min value.
    """
    full = t3 * per_time
    value = np.where(direct <= full, 0.5 * (full + direct), full)
    value = np.minimum(to_relay, value)
    with np.errstate(divide="ignore", invalid="ignore"):
        t3a = np.where(per_time > 0, t3 - value / per_time, 0.0)
    return value, np.clip(t3a, 0.0, t3)


def solve_relay(params: SystemParams, channels: ChannelSet,
                direction: Direction | None = None, jd: bool = False,
                cfg: SolverConfig | None = None) -> SolveResult:
    """Relay benchmark: one user forwards the other's message.

    Searches a (t1, t2) grid at resolution ``t1_step`` and, at every grid
    point, splits the relay slot so that both users get the same rate.
    With ``direction=None`` both directions are solved and the better one
    is returned.
    """
    cfg = cfg or SolverConfig()
    if direction is None:
        results = [solve_relay(params, channels, d, jd, cfg)
                   for d in (Direction.Y_VIA_X, Direction.X_VIA_Y)]
        # ties keep Y_VIA_X
        return results[1] if results[1].common > results[0].common else results[0]

    scheme = Scheme.RELAY_JD if jd else Scheme.RELAY_NJD
    coeffs = coefficients(params, channels)
    usable = params.usable_time
    step = cfg.t1_step
    count = int(np.floor(usable / step + 1e-9))
    i, j = np.triu_indices(count + 1, k=1)  # i < j; t1 = i*step, t1 + t2 = j*step
    keep = i >= 1
    t1 = step * i[keep]
    t2 = step * (j[keep] - i[keep])
    t3 = np.maximum(usable - step * j[keep], 0.0)
    to_relay, per_time, direct = relay_terms(t1, t2, t3, coeffs, direction, jd)
    value, t3a = _relay_split(to_relay, per_time, direct, t3)
    k = int(np.argmax(value))  # row-major (t1, t2) order: smallest t1 first on ties
    alloc = TimeAllocation(float(t1[k]), float(t2[k]), 0.0, float(t3a[k]),
                           float(t3[k] - t3a[k]))
    rates = _scalar_pair(benchmark_rates(alloc, params, channels, scheme, direction))
    residual = abs(rates.phases["relay_own"] - min(rates.phases["to_relay"],
                                                   rates.phases["via_relay"]))
    return SolveResult(scheme=scheme, allocation=alloc, rates=rates,
                       common=min(rates.r_x, rates.r_y),
                       converged=residual < cfg.rate_tolerance,
                       iterations=int(t1.size), direction=direction,
                       residuals={"users": residual})


def solve(scheme: Scheme, params: SystemParams, channels: ChannelSet,
          cfg: SolverConfig | None = None,
          direction: Direction | None = None) -> SolveResult:
    """Dispatch to the solver of ``scheme``."""
    cfg = cfg or SolverConfig()
    scheme = Scheme(scheme)
    if scheme is Scheme.NONCOOP:
        return solve_noncoop(params, channels, cfg)
    if scheme.relay:
        return solve_relay(params, channels, direction, scheme.joint_decoding, cfg)
    coeffs = coefficients(params, channels)
    return {
        Scheme.STBC_NJD: solve_stbc_njd,
        Scheme.STBC_JD: solve_stbc_jd,
        Scheme.DTB_NJD: solve_dtb_njd,
        Scheme.DTB_JD: solve_dtb_jd,
    }[scheme](coeffs, params, cfg)
