"""Integrals of positive functions on (0, inf) after the substitution u = e^t.

All integrands are handled on the log scale: the caller supplies
``log f(t)`` (already including the Jacobian) and gets back
``log int exp(log f(t)) dt``.
"""

import math
import warnings

import numpy as np
from scipy import integrate, optimize

#: log-integrand drop below the peak at which the tails are cut off
#: (e^-40 ~ 4e-18, well under the 1e-12 relative tail budget)
TAIL_DROP = 40.0
T_MIN, T_MAX = -700.0, 700.0
_STEP = 0.25


def _scan(logf, lo, hi):
    t = np.arange(lo, hi + _STEP / 2, _STEP)
    with np.errstate(all="ignore"):
        v = np.asarray(logf(t), dtype=float)
    v[np.isnan(v)] = -np.inf
    return t, v


def log_integrate(logf, lo=None, hi=None):
    """log of int_lo^hi exp(logf(t)) dt on the t axis.

    The window starts at [-80, 80] (clipped to [lo, hi]) and is widened
    until the integrand has dropped TAIL_DROP below its peak at both ends.
    Returns -inf when the integrand vanishes everywhere.
    """
    lo = T_MIN if lo is None else max(lo, T_MIN)
    hi = T_MAX if hi is None else min(hi, T_MAX)
    a, b = max(lo, -80.0), min(hi, 80.0)
    if a >= b:
        a, b = lo, hi
    while True:
        t, v = _scan(logf, a, b)
        peak = np.max(v)
        if not np.isfinite(peak):
            if a <= lo and b >= hi:
                return -math.inf
            a, b = max(lo, a - 160.0), min(hi, b + 160.0)
            continue
        grow_lo = v[0] > peak - TAIL_DROP and a > lo
        grow_hi = v[-1] > peak - TAIL_DROP and b < hi
        if not (grow_lo or grow_hi):
            break
        if grow_lo:
            a = max(lo, a - 160.0)
        if grow_hi:
            b = min(hi, b + 160.0)

    keep = np.nonzero(v > peak - TAIL_DROP)[0]
    i0, i1 = max(keep[0] - 1, 0), min(keep[-1] + 1, len(t) - 1)
    ta, tb = max(t[i0], lo), min(t[i1], hi)
    k = int(np.argmax(v))
    # sharpen the peak location for narrow integrands
    res = optimize.minimize_scalar(
        lambda x: -float(logf(np.array([x]))[0]),
        bounds=(max(t[k] - _STEP, ta), min(t[k] + _STEP, tb)),
        method="bounded", options={"xatol": 1e-10})
    tpk = res.x
    peak = max(peak, -res.fun)

    def f(x):
        return math.exp(float(logf(np.array([x]))[0]) - peak)

    pts = [tpk] if ta < tpk < tb else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, ta, tb, points=pts, epsabs=0.0,
                                epsrel=1e-11, limit=500)
    if val <= 0:
        return -math.inf
    return math.log(val) + peak


def log_moment(log_density, order, s=0.0, support=(0.0, math.inf)):
    """log of int u^order exp(-s u / 2) h(u) du, given vectorized log h."""
    lo = math.log(support[0]) if support[0] > 0 else None
    hi = math.log(support[1]) if np.isfinite(support[1]) else None

    def logf(t):
        u = np.exp(t)
        return (order + 1.0) * t - 0.5 * s * u + log_density(u)

    return log_integrate(logf, lo, hi)
