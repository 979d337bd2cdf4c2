"""Independent scalar re-implementation of the rate model, for cross-checks.

Written directly from the model with ``math`` only (no numpy, no shared
code with the package) so that agreement with the vectorized rate module is
evidence rather than a tautology.
"""

import math

import numpy as np

from wpcn import CoefficientSet


def term(duration, coeff, t1, spread):
    """duration * log2(1 + coeff * t1 / spread) with the zero-duration limit."""
    if duration <= 0 or spread <= 0:
        return 0.0
    return duration * math.log2(1.0 + coeff * t1 / spread)


def ref_cooperative(scheme, rho, t1, t2, t3, t4a, t4b):
    """(R_X, R_Y) of a cooperative scheme; ``scheme`` is the string tag."""
    r1, r2, r3, r4 = rho
    t4 = t4a + t4b
    r_x2 = term(t2, r1, t1, t2 + t4)
    r_y3 = term(t3, r2, t1, t3 + t4)
    sx = r3 * t1 / (t2 + t4) if t2 + t4 > 0 else 0.0
    sy = r4 * t1 / (t3 + t4) if t3 + t4 > 0 else 0.0
    if scheme.startswith("dtb"):
        gamma = (math.sqrt(sx) + math.sqrt(sy)) ** 2
    else:
        gamma = sx + sy
    r_x4 = t4a * math.log2(1.0 + gamma)
    r_y4 = t4b * math.log2(1.0 + gamma)
    if scheme.endswith("-jd"):
        r_x4 += term(t2, r3, t1, t2 + t4)
        r_y4 += term(t3, r4, t1, t3 + t4)
    return min(r_x2, r_x4), min(r_y3, r_y4)


def ref_relay(rho, t1, t2, t3a, t3b, y_via_x=True, jd=False):
    """(R_X, R_Y) of the relay benchmark; X relays for Y when ``y_via_x``."""
    r1, r2, r3, r4 = rho
    if not y_via_x:
        r1, r2, r3, r4 = r2, r1, r4, r3
    t3 = t3a + t3b
    to_relay = term(t2, r2, t1, t2)
    via = term(t3a, r3, t1, t3)
    if jd:
        via += term(t2, r4, t1, t2)
    own = term(t3b, r3, t1, t3)
    helped = min(to_relay, via)
    return (own, helped) if y_via_x else (helped, own)


def ref_noncoop(rho, t1, t2, t3):
    return term(t2, rho[2], t1, t2), term(t3, rho[3], t1, t3)


def random_instances(n, seed, low=-2.0, high=3.0, overheads=(0.0, 0.05, 0.1)):
    """``n`` (CoefficientSet, t0) pairs, coefficients log-uniform in [10^low, 10^high]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        rho = 10.0 ** rng.uniform(low, high, 4)
        t0 = float(rng.choice(overheads))
        out.append((CoefficientSet(*(float(r) for r in rho)), t0))
    return out


def brute_force(scheme, rho, usable, step):
    """Tiny pure-Python grid search used to check the vectorized oracle."""
    n = int(round(usable / step))
    best = -1.0
    for i1 in range(n + 1):
        for i2 in range(n + 1 - i1):
            if scheme == "noncoop":
                t1, t2 = i1 * step, i2 * step
                t3 = max(usable - t1 - t2, 0.0)
                best = max(best, min(ref_noncoop(rho, t1, t2, t3)))
                continue
            for i3 in range(n + 1 - i1 - i2):
                t1, t2, t3 = i1 * step, i2 * step, i3 * step
                rest = max(usable - t1 - t2 - t3, 0.0)
                if scheme.startswith("relay"):
                    jd = scheme == "relay-jd"
                    for y_via_x in (True, False):
                        best = max(best, min(ref_relay(rho, t1, t2, t3, rest, y_via_x, jd)))
                elif scheme == "dtb-jd":
                    for i4 in range(n + 1 - i1 - i2 - i3):
                        t4a = i4 * step
                        t4b = max(rest - t4a, 0.0)
                        best = max(best, min(ref_cooperative(scheme, rho, t1, t2, t3, t4a, t4b)))
                else:
                    best = max(best, min(ref_cooperative(scheme, rho, t1, t2, t3,
                                                         rest / 2, rest / 2)))
    return best


def exchange_split_sweep(rho, t1, t4, t0_span, points=1000):
    """r_x2 and r_y3 along t2 in (0, T0) with t3 = T0 - t2 and t1, t4 fixed."""
    from wpcn import TimeAllocation, exchange_rates

    t2 = np.linspace(0.0, t0_span, points + 2)[1:-1]
    alloc = TimeAllocation(t1, t2, t0_span - t2, t4 / 2, t4 / 2)
    return exchange_rates(alloc, rho)


def equalize_exchange(rho, t1, budget, t4):
    """t2 in [0, budget] with r_x2 = r_y3 when t2 + t3 = budget (via brentq)."""
    from scipy.optimize import brentq

    def gap(t2):
        r_x2 = term(t2, rho.rho1, t1, t2 + t4)
        r_y3 = term(budget - t2, rho.rho2, t1, budget - t2 + t4)
        return r_x2 - r_y3

    if budget <= 0:
        return 0.0
    return brentq(gap, 0.0, budget, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def joint_slot_sweep(rho, t1, span, points=1000):
    """r_x4 and r_x2 along t4 in [0, T1] with (t2, t3) re-equalized at each t4."""
    from wpcn import Scheme, TimeAllocation, exchange_rates, joint_rates

    t4 = np.linspace(0.0, span, points)
    t2 = np.array([equalize_exchange(rho, t1, span - v, v) for v in t4])
    t3 = np.maximum(span - t4 - t2, 0.0)
    alloc = TimeAllocation(t1, t2, t3, t4 / 2, t4 / 2)
    r_x2, _ = exchange_rates(alloc, rho)
    r_x4, _ = joint_rates(alloc, rho, Scheme.STBC_NJD)
    return r_x4, r_x2
